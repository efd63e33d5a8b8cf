"""Test suite for ga2c."""
