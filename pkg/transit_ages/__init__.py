"""Transit times and mean ages of linear nonautonomous compartmental systems."""

__version__ = "0.1.0"
