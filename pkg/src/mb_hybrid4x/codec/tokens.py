"""Token estimates for prompt text."""

import math
from collections.abc import Callable

from pydantic import BaseModel, ConfigDict, Field

DEFAULT_ESTIMATOR = "bytes/4"

type Tokenizer = Callable[[str], int]


class TokenEstimate(BaseModel):
    """Estimated token count of a text."""

    model_config = ConfigDict(frozen=True)

    input_tokens: int = Field(ge=0)
    method: str


def estimate_tokens(text: str, tokenizer: Tokenizer | None = None, method: str | None = None) -> TokenEstimate:
    """Estimate tokens as ceil(UTF-8 bytes / 4), or with an exact tokenizer when one is plugged in."""
    if tokenizer is not None:
        return TokenEstimate(input_tokens=max(0, tokenizer(text)), method=method or "custom")
    return TokenEstimate(input_tokens=math.ceil(len(text.encode("utf-8")) / 4), method=DEFAULT_ESTIMATOR)
