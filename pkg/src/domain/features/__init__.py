"""Per-row feature views: raw 9-channel and per-sensor magnitudes."""
