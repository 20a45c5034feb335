"""
URL configuration for the stbcfsd project.

The JSON API lives under ``api/`` (see ``core.urls``); the admin is used to
browse stored code definitions and analysis runs.
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path('api/', include('core.urls')),
]
