"""Exporter test fixtures: offline checkpoints and a 50-requirement file.

All model fixtures are built locally with random weights so the suite
runs with no hub access; what matters for the contract tests is vector
shape, determinism, and interchange-format validity, not embedding
quality.
"""
import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

import pytest


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    """Plain 2-layer transformer checkpoint with hidden size 768."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    path = tmp_path_factory.mktemp("tiny_encoder")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + [
        "the", "a", "an", "uav", "pilot", "ground", "station", "battery",
        "monitor", "flight", "controller", "shall", "not", "send", "transmit",
        "record", "log", "display", "show", "store", "retain", "report",
        "announce", "verify", "validate", "track", "update", "refresh",
        "status", "summary", "telemetry", "data", "information", "error",
        "fault", "message", "mission", "plan", "schedule", "access", "token",
        "credential", "charge", "level", "maintenance", "entry", "position",
        "estimate", "reading", "within", "seconds", "every", "minutes",
        "after", "retries", "in", "under", "milliseconds", "to", "and",
        "##s", "##ing", "##ed",
    ]
    (path / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(path / "vocab.txt"),
                                  do_lower_case=True)
    config = BertConfig(vocab_size=len(vocab), hidden_size=768,
                        num_hidden_layers=2, num_attention_heads=12,
                        intermediate_size=1024, max_position_embeddings=128)
    torch.manual_seed(1234)
    BertModel(config).save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def tiny_ner_checkpoint(tmp_path_factory):
    """Token-classification checkpoint with actor/action entity labels."""
    import torch
    from transformers import BertConfig, BertForTokenClassification, BertTokenizerFast

    path = tmp_path_factory.mktemp("tiny_ner")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "the", "uav",
             "pilot", "shall", "send", "data", "charge", "battery"]
    (path / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(path / "vocab.txt"),
                                  do_lower_case=True)
    labels = ["O", "B-ACTOR", "I-ACTOR", "B-ACTION", "I-ACTION"]
    config = BertConfig(vocab_size=len(vocab), hidden_size=32,
                        num_hidden_layers=1, num_attention_heads=2,
                        intermediate_size=64, max_position_embeddings=64,
                        num_labels=len(labels),
                        id2label=dict(enumerate(labels)),
                        label2id={lab: i for i, lab in enumerate(labels)})
    torch.manual_seed(99)
    BertForTokenClassification(config).save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def requirements_50(tmp_path_factory):
    """Canonical 50-requirement CSV produced by the pipeline's synthesizer."""
    from reqpair.corpus import save_requirements, synth_corpus

    dataset = synth_corpus(8, 8, seed=17, n_bait=1)  # 6*8 + 2 = 50 requirements
    assert len(dataset.requirements) == 50
    path = tmp_path_factory.mktemp("reqs") / "requirements.csv"
    save_requirements(dataset.requirements.values(), path)
    return str(path)
