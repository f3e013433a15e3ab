"""Error split mirrors the exit codes: spec problems vs data problems."""


class PlotSpecError(ValueError):
    """The plot spec file is unreadable, malformed, or self-inconsistent."""


class PlotDataError(ValueError):
    """An input CSV/JSON artifact cannot back the requested figure."""
