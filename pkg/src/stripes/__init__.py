"""Striped surfaces, their graphs and the groupoid comparison between them."""

from .atlas import (
    BoundaryRef,
    ExpandedAtlas,
    Gluing,
    Interval,
    IntervalFamily,
    InvalidAtlas,
    ModelStrip,
    SideSpec,
    StripedAtlas,
    UnresolvableRef,
    expand,
    gamma,
    gamma_inverse,
    seams,
    validate,
)
from .dsl import ParseError, StripeSyntaxError, parse, parse_file, serialize
from .foliation import classify_leaf, saturate, singular_report
from .graph import SurfaceGraph, build_graph, graph_invariants, orientable, subdivide, to_dot
from .groupoid import BasedGroupoid, EdgeWord, compose, inverse, presentation, reduce
from .vankampen import (
    build_cover,
    check_conditions,
    choose_cut_set,
    cover_graph,
    intersections,
    nerve_oracle,
    phi_eval,
    verify_phi_iso,
)

__version__ = "0.1.0"
