"""Shared hypothesis strategies: random processes are drawn by seed."""

from hypothesis import strategies as st

from vccts.corpus import RandomProcesses

seeds = st.integers(min_value=0, max_value=10_000)


@st.composite
def processes(draw, max_locations=4, **kw):
    return RandomProcesses(draw(seeds), max_locations=max_locations, **kw).process()


@st.composite
def bijections(draw, p):
    locs = list(p.locations)
    image = draw(st.permutations([x + 100 for x in locs]))
    return dict(zip(locs, image))
