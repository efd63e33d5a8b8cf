"""Tests for retry utilities with exponential backoff."""

import httpx
import pytest

from ga2c.utils.retry import (
    RetryError,
    calculate_backoff_delay,
    is_retryable_error,
    retry_with_backoff,
)


def _status_error(status_code: int) -> httpx.HTTPStatusError:
    request = httpx.Request("GET", "https://example.test/cora.tgz")
    response = httpx.Response(status_code, request=request)
    return httpx.HTTPStatusError(f"HTTP {status_code}", request=request, response=response)


class TestIsRetryableError:
    """Tests for is_retryable_error function."""

    def test_rate_limit_is_retryable(self):
        """Test that 429 rate limit error is retryable."""
        assert is_retryable_error(_status_error(429)) is True

    def test_server_errors_are_retryable(self):
        """Test that 5xx server errors are retryable."""
        for status_code in [500, 502, 503, 504]:
            assert is_retryable_error(_status_error(status_code)) is True

    def test_client_errors_not_retryable(self):
        """Test that 4xx client errors are not retryable."""
        for status_code in [400, 401, 403, 404]:
            assert is_retryable_error(_status_error(status_code)) is False

    def test_connection_errors_are_retryable(self):
        """Test that connection errors are retryable."""
        assert is_retryable_error(httpx.ConnectError("Failed to connect")) is True
        assert is_retryable_error(httpx.ReadTimeout("Read timeout")) is True
        assert is_retryable_error(ConnectionError("Connection reset")) is True
        assert is_retryable_error(TimeoutError("Timeout")) is True

    def test_generic_error_not_retryable(self):
        """Test that generic errors are not retryable."""
        assert is_retryable_error(ValueError("Rate limit exceeded")) is False
        assert is_retryable_error(KeyError("Key not found")) is False


class TestCalculateBackoffDelay:
    """Tests for calculate_backoff_delay function."""

    def test_exponential_growth(self):
        """Test that delays grow exponentially."""
        assert [calculate_backoff_delay(a, base_delay=1.0) for a in range(4)] == [1, 2, 4, 8]

    def test_respects_max_delay(self):
        """Test that delay is capped at max_delay."""
        assert calculate_backoff_delay(10, base_delay=1.0, max_delay=10.0) == 10.0


class TestRetryWithBackoff:
    """Tests for retry_with_backoff function."""

    def test_succeeds_on_first_try(self):
        """Test that function succeeds on first try without sleeping."""
        sleeps = []
        result = retry_with_backoff(lambda: "success", sleep=sleeps.append)
        assert result == "success"
        assert sleeps == []

    def test_retries_on_retryable_error(self):
        """Test that function retries on retryable error with backoff delays."""
        call_count = 0
        sleeps = []

        def failing_then_success():
            nonlocal call_count
            call_count += 1
            if call_count < 3:
                raise httpx.ConnectError("Connection failed")
            return "success"

        result = retry_with_backoff(
            failing_then_success, max_retries=3, base_delay=0.5, sleep=sleeps.append
        )
        assert result == "success"
        assert call_count == 3
        assert sleeps == [0.5, 1.0]

    def test_passes_arguments(self):
        """Test that positional and keyword arguments reach the function."""
        result = retry_with_backoff(lambda a, b=0: a + b, 1, b=2, sleep=lambda _: None)
        assert result == 3

    def test_raises_retry_error_after_max_retries(self):
        """Test that RetryError is raised after max retries exhausted."""
        call_count = 0

        def always_fails():
            nonlocal call_count
            call_count += 1
            raise _status_error(503)

        with pytest.raises(RetryError) as exc_info:
            retry_with_backoff(always_fails, max_retries=3, sleep=lambda _: None)

        assert call_count == 3
        assert exc_info.value.attempts == 3
        assert isinstance(exc_info.value.original_error, httpx.HTTPStatusError)

    def test_non_retryable_error_fails_immediately(self):
        """Test that non-retryable errors fail immediately without retry."""
        call_count = 0

        def not_found():
            nonlocal call_count
            call_count += 1
            raise _status_error(404)

        with pytest.raises(httpx.HTTPStatusError):
            retry_with_backoff(not_found, max_retries=3, sleep=lambda _: None)
        assert call_count == 1


class TestRetryError:
    """Tests for RetryError exception."""

    def test_error_preserves_original(self):
        """Test that the message and attributes keep the last error."""
        original = ValueError("Original error")
        error = RetryError(original, attempts=3)
        assert error.original_error is original
        assert error.attempts == 3
        assert "3 retry attempts" in str(error)
        assert "Original error" in str(error)
