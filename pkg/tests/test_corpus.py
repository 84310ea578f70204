"""Corpus ingest, pair generation, CN derivation, folds, and synthesis."""
import random

import pytest

from reqpair.corpus import (
    CONFLICT,
    DUPLICATE,
    NEUTRAL,
    PairDataset,
    Requirement,
    RequirementPair,
    derive_cn,
    generate_pairs,
    ingest_pairs,
    ingest_requirements,
    load_dataset_dir,
    make_dataset,
    save_dataset_dir,
    save_pairs,
    save_requirements,
    stratified_kfold,
    synth_corpus,
)
from reqpair.errors import (
    ClassTooSmallError,
    DuplicateIdError,
    EmptyTextError,
    ParseError,
    SelfPairError,
    UnknownIdError,
    UnknownLabelError,
    ValidationError,
)


def _reqs(n, prefix="r"):
    return [Requirement(id=f"{prefix}{i:03d}", doc_id="doc",
                        text=f"The system shall log event {i}.") for i in range(n)]


def _dataset_with_labels(counts: dict[str, int], name="ds") -> PairDataset:
    total = sum(counts.values())
    n = 2
    while n * (n - 1) // 2 < total:
        n += 1
    reqs = _reqs(n)
    ids = [r.id for r in reqs]
    labels = [lab for lab, c in counts.items() for _ in range(c)]
    pairs = []
    k = 0
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            if k >= total:
                break
            pairs.append(RequirementPair(id1=ids[i], id2=ids[j], label=labels[k]))
            k += 1
    return make_dataset(name, reqs, pairs)


# ---------------------------------------------------------------------------
# ingest_requirements
# ---------------------------------------------------------------------------

def test_ingest_requirements_csv(tmp_path):
    path = tmp_path / "reqs.csv"
    path.write_text('id,doc_id,text\nr1,d1,"The UAV shall hover."\n'
                    'r2,d1,"The UAV shall land, safely."\nr3,d2,Text three\n',
                    encoding="utf-8")
    reqs = ingest_requirements(path)
    assert len(reqs) == 3
    assert reqs[1].text == "The UAV shall land, safely."


def test_ingest_requirements_duplicate_id(tmp_path):
    path = tmp_path / "reqs.csv"
    path.write_text("id,doc_id,text\nR1,d,first text\nR1,d,second text\n",
                    encoding="utf-8")
    with pytest.raises(DuplicateIdError, match="R1"):
        ingest_requirements(path)


def test_ingest_requirements_identical_rows_collapse(tmp_path):
    path = tmp_path / "reqs.csv"
    path.write_text("id,doc_id,text\nR1,d,same\nR1,d,same\n", encoding="utf-8")
    assert len(ingest_requirements(path)) == 1


def test_ingest_requirements_empty_text(tmp_path):
    path = tmp_path / "reqs.csv"
    path.write_text('id,doc_id,text\nr1,d,"   "\n', encoding="utf-8")
    with pytest.raises(EmptyTextError):
        ingest_requirements(path)


def test_ingest_requirements_jsonl_and_parse_error(tmp_path):
    path = tmp_path / "reqs.jsonl"
    path.write_text('{"id": "a", "doc_id": "d", "text": "Alpha."}\nnot json\n',
                    encoding="utf-8")
    with pytest.raises(ParseError) as err:
        ingest_requirements(path)
    assert err.value.line == 2


def test_ingest_requirements_missing_column(tmp_path):
    path = tmp_path / "reqs.csv"
    path.write_text("id,text\nr1,hello\n", encoding="utf-8")
    with pytest.raises(ParseError, match="doc_id"):
        ingest_requirements(path)


# ---------------------------------------------------------------------------
# ingest_pairs
# ---------------------------------------------------------------------------

def _two_req_dataset():
    return make_dataset("t", [
        Requirement(id="r_a", doc_id="d", text="The UAV shall hover."),
        Requirement(id="r_b", doc_id="d", text="The UAV shall land."),
    ])


def test_ingest_pairs_canonicalizes_label(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text("id1,id2,label\nr_a,r_b,Conflict\n", encoding="utf-8")
    ds = ingest_pairs(path, _two_req_dataset())
    assert ds.pairs[0] == RequirementPair(id1="r_a", id2="r_b", label="conflict")


def test_ingest_pairs_canonical_ordering(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text("id1,id2,label\nr_b,r_a,neutral\n", encoding="utf-8")
    ds = ingest_pairs(path, _two_req_dataset())
    assert (ds.pairs[0].id1, ds.pairs[0].id2) == ("r_a", "r_b")


def test_ingest_pairs_self_pair(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text("id1,id2,label\nr_a,r_a,neutral\n", encoding="utf-8")
    with pytest.raises(SelfPairError):
        ingest_pairs(path, _two_req_dataset())


def test_ingest_pairs_unknown_id_and_label(tmp_path):
    bad_id = tmp_path / "p1.csv"
    bad_id.write_text("id1,id2,label\nr_a,r_z,neutral\n", encoding="utf-8")
    with pytest.raises(UnknownIdError, match="r_z"):
        ingest_pairs(bad_id, _two_req_dataset())
    bad_label = tmp_path / "p2.csv"
    bad_label.write_text("id1,id2,label\nr_a,r_b,maybe\n", encoding="utf-8")
    with pytest.raises(UnknownLabelError, match="maybe"):
        ingest_pairs(bad_label, _two_req_dataset())


def test_ingest_roundtrip_byte_identical(tmp_path):
    ds = _dataset_with_labels({CONFLICT: 4, DUPLICATE: 2, NEUTRAL: 5})
    save_dataset_dir(ds, tmp_path / "a")
    loaded = load_dataset_dir(tmp_path / "a")
    save_dataset_dir(loaded, tmp_path / "b")
    for name in ("requirements.csv", "pairs.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# ---------------------------------------------------------------------------
# generate_pairs
# ---------------------------------------------------------------------------

def test_generate_pairs_three_requirements():
    ds = make_dataset("t", _reqs(3))
    pairs = generate_pairs(ds)
    assert len(pairs) == 3
    assert {(p.id1, p.id2) for p in pairs} == {
        ("r000", "r001"), ("r000", "r002"), ("r001", "r002")}


def test_generate_pairs_single_requirement_errors():
    ds = make_dataset("t", _reqs(1))
    with pytest.raises(ValidationError):
        generate_pairs(ds)


def test_generate_pairs_uav_scale():
    # 116 requirements give 6670 unordered pairs, the 18 + 6652 split size.
    ds = make_dataset("uav", _reqs(116))
    assert len(generate_pairs(ds)) == 6670 == 18 + 6652


def test_generate_pairs_count_property():
    rng = random.Random(7)
    for _ in range(8):
        n = rng.randrange(2, 40)
        ds = make_dataset("t", _reqs(n))
        pairs = generate_pairs(ds)
        assert len(pairs) == n * (n - 1) // 2
        assert len({p.key for p in pairs}) == len(pairs)
        assert all(p.id1 < p.id2 for p in pairs)


# ---------------------------------------------------------------------------
# derive_cn
# ---------------------------------------------------------------------------

def test_derive_cn_drops_duplicates():
    ds = _dataset_with_labels({CONFLICT: 10, DUPLICATE: 4, NEUTRAL: 6})
    cn = derive_cn(ds)
    assert cn.mode == "CN"
    assert cn.label_counts() == {CONFLICT: 10, NEUTRAL: 6}
    assert cn.requirements == ds.requirements


def test_derive_cn_without_duplicates_is_identity():
    ds = _dataset_with_labels({CONFLICT: 3, NEUTRAL: 5})
    assert derive_cn(ds).pairs == ds.pairs


def test_derive_cn_idempotent():
    ds = _dataset_with_labels({CONFLICT: 3, DUPLICATE: 2, NEUTRAL: 4})
    once = derive_cn(ds)
    assert derive_cn(once) == once


def test_derive_cn_support_arithmetic():
    # Published per-fold mean supports 1110.6 / 334.6 / 680 over five folds
    # correspond to totals 5553 / 1673 / 3400; CN keeps 5553 + 3400 pairs.
    counts = {CONFLICT: 5553, DUPLICATE: 1673, NEUTRAL: 3400}
    assert counts[CONFLICT] / 5 == 1110.6
    assert counts[DUPLICATE] / 5 == 334.6
    assert counts[NEUTRAL] / 5 == 680.0
    ds = _dataset_with_labels(counts)
    cn = derive_cn(ds)
    assert cn.label_counts() == {CONFLICT: 5553, NEUTRAL: 3400}
    assert len(cn.pairs) == 8953


# ---------------------------------------------------------------------------
# stratified_kfold
# ---------------------------------------------------------------------------

def test_kfold_exact_split():
    ds = _dataset_with_labels({CONFLICT: 10, NEUTRAL: 10})
    plan = stratified_kfold(ds, 2, seed=0)
    for fold in (0, 1):
        pairs = plan.fold_pairs(ds, fold)
        labels = [p.label for p in pairs]
        assert labels.count(CONFLICT) == 5 and labels.count(NEUTRAL) == 5


def test_kfold_pigeonhole():
    ds = _dataset_with_labels({CONFLICT: 20, NEUTRAL: 3})
    plan = stratified_kfold(ds, 3, seed=1)
    sizes = sorted(
        sum(1 for p in plan.fold_pairs(ds, f) if p.label == CONFLICT)
        for f in range(3))
    assert sizes == [6, 7, 7]


def test_kfold_deterministic():
    ds = _dataset_with_labels({CONFLICT: 9, NEUTRAL: 13})
    assert stratified_kfold(ds, 4, seed=42) == stratified_kfold(ds, 4, seed=42)


def test_kfold_partition_properties():
    rng = random.Random(3)
    for trial in range(5):
        counts = {CONFLICT: rng.randrange(5, 30), DUPLICATE: rng.randrange(5, 30),
                  NEUTRAL: rng.randrange(5, 30)}
        ds = _dataset_with_labels(counts)
        k = rng.randrange(2, 5)
        plan = stratified_kfold(ds, k, seed=trial)
        folds = [plan.fold_pairs(ds, f) for f in range(k)]
        all_keys = [p.key for fold in folds for p in fold]
        assert sorted(all_keys) == sorted(p.key for p in ds.pairs)
        assert len(set(all_keys)) == len(all_keys)
        for label in counts:
            sizes = [sum(1 for p in fold if p.label == label) for fold in folds]
            assert max(sizes) - min(sizes) <= 1


def test_kfold_class_too_small():
    ds = _dataset_with_labels({CONFLICT: 2, NEUTRAL: 10})
    with pytest.raises(ClassTooSmallError, match="conflict"):
        stratified_kfold(ds, 3, seed=0)


def test_kfold_rejects_unlabeled():
    ds = make_dataset("t", _reqs(3), [RequirementPair(id1="r000", id2="r001")])
    with pytest.raises(ValidationError):
        stratified_kfold(ds, 2, seed=0)


# ---------------------------------------------------------------------------
# synth_corpus
# ---------------------------------------------------------------------------

def test_synth_corpus_counts():
    ds = synth_corpus(8, 5, seed=0)
    assert len(ds.pairs) == 15
    assert ds.label_counts() == {CONFLICT: 5, DUPLICATE: 5, NEUTRAL: 5}


def test_synth_corpus_deterministic(tmp_path):
    for sub in ("x", "y"):
        ds = synth_corpus(6, 7, seed=123)
        save_requirements(ds.requirements.values(), tmp_path / f"{sub}.csv")
        save_pairs(ds.pairs, tmp_path / f"{sub}_pairs.csv")
    assert (tmp_path / "x.csv").read_bytes() == (tmp_path / "y.csv").read_bytes()
    assert (tmp_path / "x_pairs.csv").read_bytes() == (tmp_path / "y_pairs.csv").read_bytes()


def test_synth_conflict_pairs_share_actor():
    ds = synth_corpus(8, 10, seed=5)
    for pair in ds.pairs:
        if pair.label == CONFLICT:
            first = ds.requirements[pair.id1].text.split(" shall")[0]
            second = ds.requirements[pair.id2].text.split(" shall")[0]
            assert first == second


def test_synth_bait_pairs_are_neutral():
    plain = synth_corpus(8, 5, seed=2)
    baited = synth_corpus(8, 5, seed=2, n_bait=4)
    assert len(baited.pairs) == len(plain.pairs) + 4
    assert baited.label_counts()[NEUTRAL] == plain.label_counts()[NEUTRAL] + 4
