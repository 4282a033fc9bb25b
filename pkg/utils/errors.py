from typing import Optional


class MapError(Exception):
    """Base class for every failure raised by the map workbench"""


class InvalidMapError(MapError):
    """A rotation system violates the map axioms"""


class NotBipartiteError(MapError):
    """The map has an odd cycle (a loop, for instance)"""


class ShapeError(MapError):
    """A map does not have the shape an operation expects"""


class IntegrityError(MapError):
    """A pipeline result contradicts a construction that cannot fail"""


class StructuralAnomaly(MapError):
    """A dual digraph is not Eulerian or not connected"""

    def __init__(self, message: str, components=None):
        super().__init__(message)
        self.components = components or []


class UnsupportedForkError(MapError):
    """A reduced word repeats one letter three or more times"""


class CorrespondenceError(MapError):
    """A correspondence file could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
