"""URL configuration for core app"""
from django.urls import path
from core import views

urlpatterns = [
    path('codes/', views.code_list_api, name='code_list_api'),
    path('codes/<str:name>/', views.code_detail_api, name='code_detail_api'),
    path('runs/', views.run_list_api, name='run_list_api'),
    path('runs/<int:run_id>/', views.run_detail_api, name='run_detail_api'),
]
