# Map workbench library
