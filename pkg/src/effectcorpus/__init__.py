"""effectcorpus: corpus construction and effect-polarity classification
for PubMed abstracts, plus a rationale-annotation service."""

__version__ = "0.1.0"
