"""Build the Wiki-DB relational schema from MediaWiki XML dumps."""

__version__ = "0.1.0"
