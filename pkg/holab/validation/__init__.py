"""Type aliases with assertion helpers, and the pydantic models for configuration, estimates and reports."""
