"""Batch front end: scenario files, task runners, fixture corpus."""
