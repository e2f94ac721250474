"""Configuration, errors, seeding and run directories."""
