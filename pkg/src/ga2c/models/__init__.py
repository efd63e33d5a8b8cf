"""Pydantic models for checkpoints, datasets, reports and metric records."""
