"""Climax-anchored bidirectional MCTS over plot-event outlines.

Thin wrapper over the compiled extension: structured results come back as
JSON strings from C++ and are decoded here into plain dicts.
"""

import json

from ._core import (  # noqa: F401
    BitMctsError,
    SearchConfig,
    SyntheticProvider,
    __version__,
    count_codepoints,
    count_whitespace_tokens,
    ucb_score,
)
from . import _core


def run_phase(climax_text, config, provider, backward=False):
    """Run one MCTS phase; returns the tree dump as a dict."""
    return json.loads(_core.run_phase_json(climax_text, config, backward, provider))


def bidirectional_search(climax_text, forward, backward, provider, swap_order=False):
    """Forward-then-backward search; returns the final outline as a dict."""
    return json.loads(
        _core.bidirectional_search_json(climax_text, forward, backward, provider, swap_order)
    )


def stage_partition(outline):
    """Label an outline dict with its five dramatic stages."""
    return json.loads(_core.stage_partition_json(json.dumps(outline)))


def run_pipeline(
    theme_text,
    provider,
    theme_id="theme",
    forward=None,
    backward=None,
    strategy="bit-mcts",
    refinement=True,
    run_dir="",
):
    """Full theme-to-fiction pipeline; returns an artifact summary dict."""
    forward = forward or SearchConfig()
    backward = backward or SearchConfig()
    return json.loads(
        _core.run_pipeline_json(
            theme_text, theme_id, forward, backward, provider, strategy, refinement, run_dir
        )
    )
