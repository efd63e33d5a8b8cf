"""Utility functions for errors, logging, retries, seeding and file output."""

from ga2c.utils.retry import (
    RetryError,
    calculate_backoff_delay,
    is_retryable_error,
    retry_with_backoff,
)

__all__ = [
    "RetryError",
    "calculate_backoff_delay",
    "is_retryable_error",
    "retry_with_backoff",
]
