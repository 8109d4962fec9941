"""The four series-feature taxonomies and their category labels."""

FEATURE_CATEGORIES: dict[str, tuple[str, str, str]] = {
    "trend": ("upward trend", "downward trend", "constant trend"),
    "volatility": ("increased volatility", "decreased volatility", "constant volatility"),
    "season": ("fixed seasonality", "shifting seasonality", "no seasonality"),
    "outlier": ("sudden spike", "level shift", "no outlier"),
}

FEATURES = tuple(FEATURE_CATEGORIES)

SERIES_LENGTHS = (64, 128, 256, 512)
