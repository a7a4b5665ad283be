"""News-source reliability observatory for an AT-protocol firehose.

Ingests posts, reposts and likes; reduces shared links to registrable
domains; classifies them against operator-supplied rating files; and
serves prevalence time series plus graph and lexicon analytics over a
read-only HTTP API.
"""

__version__ = "0.1.0"
