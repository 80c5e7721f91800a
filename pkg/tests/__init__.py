"""Test package for the transmission incentive planning application."""
