from .search import NAVIGATE, STATIC_LINK, Crawler, CrawlResult, RestoreFailed, crawl, seed_from_links
from .state import (GUIDED, HYBRID, RANDOM, STRATEGIES, CrawlState, StateGraph, StrategyConfig,
                    is_visited)

__all__ = [
    "GUIDED", "HYBRID", "NAVIGATE", "RANDOM", "STATIC_LINK", "STRATEGIES", "CrawlResult",
    "CrawlState", "Crawler", "RestoreFailed", "StateGraph", "StrategyConfig", "crawl",
    "is_visited", "seed_from_links",
]
