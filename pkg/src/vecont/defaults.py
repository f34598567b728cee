"""Default query formulations, genre list, and synthetic-corpus builder.

The formulation set holds 47 templates across five phrasing families
(direct, mood, action, preference, context); every template mentions the
genre exactly once and can be overridden wholesale from a run config.
"""

from __future__ import annotations

import numpy as np

from .dataset import GenreCluster, SynthSpec
from .extraction import FormulationTemplate
from .ontology import MUSIC_DIMENSIONS
from .stats import derive_rng

DEFAULT_FORMULATIONS: tuple[FormulationTemplate, ...] = tuple(
    FormulationTemplate(fid, template)
    for fid, template in [
        ("direct-01", "{genre}"),
        ("direct-02", "{genre} music"),
        ("direct-03", "{genre} songs"),
        ("direct-04", "{genre} tracks"),
        ("direct-05", "a {genre} playlist"),
        ("direct-06", "some {genre}"),
        ("mood-01", "I'm feeling {genre}"),
        ("mood-02", "I'm in the mood for {genre} music"),
        ("mood-03", "I feel like listening to {genre}"),
        ("mood-04", "I'm in a {genre} mood"),
        ("mood-05", "Feeling like some {genre} today"),
        ("mood-06", "I could go for some {genre}"),
        ("mood-07", "I'm craving {genre} music"),
        ("mood-08", "In the mood for {genre}"),
        ("mood-09", "Today feels like a {genre} day"),
        ("mood-10", "Let's chill with some {genre} music"),
        ("action-01", "Find me {genre} music"),
        ("action-02", "Play me {genre} songs"),
        ("action-03", "Play some {genre}"),
        ("action-04", "Put on some {genre}"),
        ("action-05", "Queue up some {genre}"),
        ("action-06", "Start playing {genre} music"),
        ("action-07", "Throw on some {genre}"),
        ("action-08", "Search for {genre} music"),
        ("action-09", "Look up some {genre} songs"),
        ("action-10", "Spin some {genre} records"),
        ("action-11", "Shuffle some {genre} tracks"),
        ("action-12", "Stream some {genre} for me"),
        ("pref-01", "I want {genre} music"),
        ("pref-02", "I want to hear {genre}"),
        ("pref-03", "I'd like some {genre} music"),
        ("pref-04", "I'd love to hear some {genre}"),
        ("pref-05", "I prefer {genre} right now"),
        ("pref-06", "Give me {genre}"),
        ("pref-07", "I really want some {genre} songs"),
        ("pref-08", "I'd enjoy some {genre} now"),
        ("pref-09", "My pick is {genre}"),
        ("pref-10", "I choose {genre}"),
        ("context-01", "What should I listen to if I like {genre}?"),
        ("context-02", "Recommend me some {genre} music"),
        ("context-03", "Suggest {genre} songs for me"),
        ("context-04", "We're having a {genre} night"),
        ("context-05", "Music for a {genre} evening"),
        ("context-06", "Something {genre} for the drive"),
        ("context-07", "Background {genre} while I work"),
        ("context-08", "A {genre} soundtrack for tonight"),
        ("context-09", "Help me discover {genre} music"),
    ]
)

DEFAULT_GENRES: tuple[str, ...] = (
    "afrobeat",
    "ambient",
    "bluegrass",
    "blues",
    "bossa nova",
    "classical",
    "country",
    "cumbia",
    "death metal",
    "disco",
    "drum and bass",
    "dubstep",
    "edm",
    "emo",
    "flamenco",
    "folk",
    "funk",
    "gospel",
    "grunge",
    "hard rock",
    "hip hop",
    "house",
    "indie pop",
    "indie rock",
    "j-pop",
    "jazz",
    "k-pop",
    "latin",
    "lofi",
    "merengue",
    "metal",
    "new age",
    "opera",
    "pop",
    "punk",
    "r&b",
    "rap",
    "reggae",
    "rock",
    "salsa",
    "samba",
    "ska",
    "soul",
    "swing",
    "synthwave",
    "tango",
    "techno",
    "trance",
    "trap",
    "vocal jazz",
)


def default_synth_spec(
    genres: tuple[str, ...] = DEFAULT_GENRES,
    songs_per_genre: int = 120,
    seed: int = 777,
    relative_spread: float = 0.04,
) -> SynthSpec:
    """One Gaussian hotspot per genre at a seed-determined location.

    Cluster means are drawn uniformly inside the central 80% of each
    dimension's domain so clipping stays rare and hotspots separate well.
    """
    rng = derive_rng(seed, "synth-spec")
    clusters = []
    for genre in genres:
        mean = []
        spread = []
        for _, lo, hi in MUSIC_DIMENSIONS:
            width = hi - lo
            mean.append(float(rng.uniform(lo + 0.1 * width, hi - 0.1 * width)))
            spread.append(float(relative_spread * width))
        clusters.append(GenreCluster(genre=genre, mean=tuple(mean), spread=tuple(spread)))
    return SynthSpec(
        clusters=tuple(clusters),
        total_count=songs_per_genre * len(genres),
        seed=seed,
    )
