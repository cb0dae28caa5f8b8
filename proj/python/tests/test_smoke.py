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

import math

import pytest

import lcmlab


def test_sld_and_smoothing():
    sld = lcmlab.simulated_label_distribution([1.0, 0.0], [0.5, 0.5], 4.0)
    assert sld == pytest.approx([0.98201379, 0.01798621], abs=1e-7)
    assert lcmlab.label_smoothing(0, 4, 0.1) == pytest.approx([0.925, 0.025, 0.025, 0.025], abs=1e-15)
    assert lcmlab.one_hot(2, 3) == [0.0, 0.0, 1.0]
    assert sum(lcmlab.softmax([4.5, 0.5, -3.0])) == pytest.approx(1.0, abs=1e-12)


def test_kl():
    assert lcmlab.kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2.0), abs=1e-12)


def test_bad_input_raises_value_error():
    with pytest.raises(ValueError):
        lcmlab.simulated_label_distribution([0.5, 0.5], [0.5, 0.5], 4.0)
    with pytest.raises(ValueError):
        lcmlab.canonical_strategy("lcm(")


def test_strategy_names():
    assert lcmlab.canonical_strategy("lcm") == "lcm(4)"
    assert lcmlab.canonical_strategy("ls") == "ls(0.1)"


def test_welch():
    r = lcmlab.welch_t_test([0.70, 0.72, 0.71], [0.68, 0.67, 0.69])
    assert r["t"] == pytest.approx(3.6742346, abs=1e-6)
    assert r["p_value"] == pytest.approx(0.0213116, abs=1e-6)
    assert not r["identical"]


def test_generator_and_bayes():
    corpus = lcmlab.generate_corpus(classes=4, words_per_class=10, overlap=0.5, samples_per_class=5,
                                    doc_length=8, seed=1)
    assert len(corpus) == 20
    assert {r["label"] for r in corpus} == {"class0", "class1", "class2", "class3"}
    assert all(len(r["text"].split()) == 8 for r in corpus)
    assert lcmlab.pair_bayes_accuracy(4, 50, 1.0, 30, 1) == pytest.approx(0.5, abs=1e-12)
    assert lcmlab.pair_bayes_accuracy(4, 50, 0.5, 30, 1) == pytest.approx(0.9982157383, abs=1e-9)


def test_run_experiment(tmp_path):
    config = {
        "dataset": {"generator": {"classes": 4, "words_per_class": 8, "samples_per_class": 15, "doc_length": 8}},
        "train": {"epochs": 2, "dim": 6, "batch_size": 16},
        "n_splits": 2,
        "seed": 3,
        "out": "run",
    }
    a = lcmlab.run_experiment(config, base_dir=tmp_path, write=True)
    b = lcmlab.run_experiment(config, base_dir=tmp_path)
    assert [r["strategy"] for r in a["reports"]] == ["one-hot", "ls(0.1)", "lcm(4)"]
    assert [r["accuracies"] for r in a["reports"]] == [r["accuracies"] for r in b["reports"]]
    assert (tmp_path / "run" / "summary.csv").read_text().startswith("strategy,mean,std,p_vs_baseline\n")
    assert a["manifest"]["seeds"]["experiment"] == 3
