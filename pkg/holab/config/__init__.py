"""Provides configuration and management functionalities for logging."""