# This file is part of lsst-lorentzshape.
#
# Developed for the LSST Data Management System.
# This product includes software developed by the LSST Project
# (https://www.lsst.org).
# See the COPYRIGHT file at the top-level directory of this distribution
# for details of code ownership.
#
# Use of this source code is governed by a 3-clause BSD-style
# license that can be found in the LICENSE file.

"""Similarity invariants, reconstruction and matching of curves in
Minkowski space.
"""

from ._exceptions import *
from .config import ShapeConfig, get_config
from .curve import (
    DerivativeJet,
    SampledCurve,
    arc_length,
    derivatives,
    read_curve,
    sample_analytic,
    write_curve,
)
from .frenet import FocalCurvatures, FrenetField, ShapeSignature, frenet, pshape
from .minkowski import CausalCharacter, LorentzVector, PSimilarity, angle_between, causal_classify, inner
from .reconstruction import ReconstructionSpec, reconstruct, round_trip
from .selfsimilar import CausalCase, SelfSimilarSpec, generate
from .similarity import MatchReport, match_curves, recover_similarity
from .version import *
