"""Runtime settings and system-definition files."""
