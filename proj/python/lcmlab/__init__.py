# Copyright (c) 2026 The lcmlab Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Label confusion training lab.

Thin Python layer over the C++ core: target distributions, the Welch test,
the synthetic corpus generator and the repeated-split experiment runner.
"""

import json
import os

from ._core import (
    LcmError,
    ValidationError,
    canonical_strategy,
    derive_seed,
    generate_corpus,
    kl_divergence,
    label_smoothing,
    one_hot,
    pair_bayes_accuracy,
    simulated_label_distribution,
    softmax,
    welch_t_test,
)
from ._core import _run_experiment

__all__ = [
    "LcmError",
    "ValidationError",
    "canonical_strategy",
    "derive_seed",
    "generate_corpus",
    "kl_divergence",
    "label_smoothing",
    "one_hot",
    "pair_bayes_accuracy",
    "run_experiment",
    "simulated_label_distribution",
    "softmax",
    "welch_t_test",
]


def run_experiment(config, base_dir=".", write=False):
    """Runs every strategy over the configured splits.

    `config` uses the same keys as the command-line config file. Returns a
    dict with per-strategy "reports" and the run "manifest". With
    write=True the report files also go to config["out"].
    """
    text = _run_experiment(json.dumps(config), os.fspath(base_dir), write)
    return json.loads(text)
