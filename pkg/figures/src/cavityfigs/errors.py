"""Error types for figure rendering from simulation tables."""

__all__ = ["FigureError", "EmptyTableError", "MissingColumnsError", "TableFormatError"]


class FigureError(Exception):
    """Base class for every failure this package raises on purpose."""


class TableFormatError(FigureError):
    """The file is not a table in a recognized format."""


class EmptyTableError(FigureError):
    """The table has a header but no data rows; refusing to render a blank image."""


class MissingColumnsError(FigureError):
    """The table lacks columns the figure needs.

    The message names the full expected schema so the caller can see at a
    glance which generator invocation produces a compatible table.
    """

    def __init__(self, path, missing, expected, found):
        self.missing = tuple(missing)
        self.expected = tuple(expected)
        self.found = tuple(found)
        super().__init__(
            f"{path}: missing column(s) {', '.join(repr(m) for m in self.missing)}; "
            f"expected schema: [{', '.join(self.expected)}]; "
            f"found: [{', '.join(self.found)}]"
        )
