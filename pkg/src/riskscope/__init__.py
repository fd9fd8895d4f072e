"""riskscope: an explainable diabetes-risk engine.

Boosted-tree classification, faithfulness-selected attributions,
percentile range analysis against curated evidence, stepwise
counterfactual plans, hybrid chat routing, and an HTTP service.
"""

__version__ = "0.1.0"
