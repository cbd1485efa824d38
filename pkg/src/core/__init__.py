"""Core configuration and utilities"""

