"""Domain packages: ingest, features and classifiers."""
