"""Tree construction, boundary assignment rules, compatibility checks and
the serialization round trip."""

from collections import Counter

import pytest

from treegibbs import (
    CapacityError,
    FieldLabel,
    FieldPair,
    SchemeMatrix,
    assign_fields,
    build_tree,
    enumerate_schemes,
    export_assignment,
    numeric_field,
    parse_assignment,
    solve_scalar,
    verify_compatibility,
)

H_STAR_2_08 = 2.0634370688955605

ORDER_SIX_MIXED = SchemeMatrix(k=6, a=(2, 1, 1, 2), b=(1, 1, 2, 2))


def _child_label_counter(asg, v):
    return Counter(asg.labels[c].value for c in asg.tree.children(v))


class TestBuildTree:
    def test_depth_zero(self):
        tree = build_tree(2, 0)
        assert tree.num_vertices == 1
        assert list(tree.children(0)) == []

    def test_vertex_count(self):
        tree = build_tree(2, 3)
        assert tree.num_vertices == 15
        assert [len(tree.level(m)) for m in range(4)] == [1, 2, 4, 8]

    def test_level_width(self):
        tree = build_tree(6, 2)
        assert len(tree.level(2)) == 36

    def test_heap_indexing(self):
        tree = build_tree(3, 2)
        assert list(tree.children(0)) == [1, 2, 3]
        assert list(tree.children(2)) == [7, 8, 9]
        assert tree.parent(9) == 2
        assert tree.parent(0) == -1

    def test_unary_tree(self):
        tree = build_tree(1, 4)
        assert tree.num_vertices == 5
        assert list(tree.children(3)) == [4]

    def test_capacity(self):
        with pytest.raises(CapacityError):
            build_tree(10, 7)
        assert build_tree(10, 5).num_vertices == 111_111
        with pytest.raises(ValueError):
            build_tree(0, 2)


class TestAssignFields:
    def test_order_six_root_plus_h(self):
        tree = build_tree(6, 1)
        asg = assign_fields(tree, ORDER_SIX_MIXED, FieldLabel.PLUS_H, FieldPair(1.0, 0.5))
        assert _child_label_counter(asg, 0) == {"+H": 2, "-H": 1, "+L": 1, "-L": 2}

    def test_order_six_root_minus_l(self):
        tree = build_tree(6, 1)
        asg = assign_fields(tree, ORDER_SIX_MIXED, FieldLabel.MINUS_L, FieldPair(1.0, 0.5))
        assert _child_label_counter(asg, 0) == {"-H": 1, "+H": 1, "-L": 2, "+L": 2}

    def test_translation_invariant_all_plus_h(self):
        tree = build_tree(3, 3)
        m = SchemeMatrix(k=3, a=(3, 0, 0, 0), b=(3, 0, 0, 0))
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(0.7, 0.0))
        assert all(lab is FieldLabel.PLUS_H for lab in asg.labels)

    def test_global_sign_symmetry(self):
        tree = build_tree(6, 2)
        plus = assign_fields(tree, ORDER_SIX_MIXED, FieldLabel.PLUS_H, FieldPair(1.0, 0.5))
        minus = assign_fields(tree, ORDER_SIX_MIXED, FieldLabel.MINUS_H, FieldPair(1.0, 0.5))
        assert all(a is b.negated() for a, b in zip(minus.labels, plus.labels))

    def test_order_mismatch(self):
        tree = build_tree(2, 2)
        with pytest.raises(ValueError):
            assign_fields(tree, ORDER_SIX_MIXED, FieldLabel.PLUS_H, FieldPair(1.0, 0.5))

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_child_multisets_exhaustive(self, k):
        # every internal vertex realizes the scheme row of its label type,
        # for every scheme, every root label, depth up to 4
        depth = 4 if k <= 3 else 3
        tree = build_tree(k, depth)
        values = FieldPair(0.9, 0.4)
        for m in enumerate_schemes(k):
            for root in FieldLabel:
                asg = assign_fields(tree, m, root, values)
                for v in range(tree.level_offsets[depth]):
                    lab = asg.labels[v]
                    row = m.a if lab.is_h_type else m.b
                    s = lab.sign
                    want = {
                        _label_value(True, s): row[0],
                        _label_value(True, -s): row[1],
                        _label_value(False, s): row[2],
                        _label_value(False, -s): row[3],
                    }
                    want = {key: n for key, n in want.items() if n}
                    assert _child_label_counter(asg, v) == want

    def test_seeded_permutation_keeps_multisets(self):
        # a shuffled assignment still realizes the scheme row of each
        # vertex's own (shuffled) label
        tree = build_tree(6, 2)
        base = assign_fields(tree, ORDER_SIX_MIXED, FieldLabel.PLUS_H, FieldPair(1.0, 0.5))
        shuffled = assign_fields(
            tree, ORDER_SIX_MIXED, FieldLabel.PLUS_H, FieldPair(1.0, 0.5), seed=7
        )
        assert shuffled.labels != base.labels
        for v in range(tree.level_offsets[2]):
            lab = shuffled.labels[v]
            row = ORDER_SIX_MIXED.a if lab.is_h_type else ORDER_SIX_MIXED.b
            s = lab.sign
            want = {
                _label_value(True, s): row[0],
                _label_value(True, -s): row[1],
                _label_value(False, s): row[2],
                _label_value(False, -s): row[3],
            }
            want = {key: n for key, n in want.items() if n}
            assert _child_label_counter(shuffled, v) == want

    def test_interface_scheme_has_interfaces_at_every_level(self):
        # two-valued interface pattern: some child always flips sign, so
        # every level below the root contains a sign change from the parent
        tree = build_tree(5, 4)
        m = SchemeMatrix(k=5, a=(3, 0, 1, 1), b=(3, 0, 1, 1))
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(0.7, 0.7))
        for level in range(1, 5):
            assert any(
                asg.labels[v].sign != asg.labels[tree.parent(v)].sign
                for v in tree.level(level)
            )


def _label_value(h_type: bool, sign: int) -> str:
    return ("+" if sign > 0 else "-") + ("H" if h_type else "L")


class TestNumericField:
    def test_mapping(self):
        tree = build_tree(6, 1)
        asg = assign_fields(tree, ORDER_SIX_MIXED, FieldLabel.PLUS_H, FieldPair(2.063, 0.5))
        by_label = {}
        for v in range(tree.num_vertices):
            by_label[asg.labels[v].value] = numeric_field(asg, v)
        assert by_label["+H"] == 2.063
        assert by_label["-H"] == -2.063
        assert by_label["+L"] == 0.5
        assert by_label["-L"] == -0.5

    def test_zero_values(self):
        tree = build_tree(6, 1)
        asg = assign_fields(tree, ORDER_SIX_MIXED, FieldLabel.MINUS_L, FieldPair(0.0, 0.0))
        assert all(numeric_field(asg, v) == 0.0 for v in range(tree.num_vertices))

    def test_unknown_vertex(self):
        tree = build_tree(2, 1)
        m = SchemeMatrix(k=2, a=(2, 0, 0, 0), b=(0, 0, 2, 0))
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(1.0, 0.0))
        with pytest.raises(KeyError):
            numeric_field(asg, 99)


class TestVerifyCompatibility:
    def test_zero_fields_pass(self):
        tree = build_tree(2, 3)
        m = SchemeMatrix(k=2, a=(1, 1, 0, 0), b=(0, 0, 1, 1))
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(0.0, 0.0))
        report = verify_compatibility(asg, 0.7)
        assert report.max_residual == 0.0 and report.passed

    def test_solved_pair_passes(self):
        tree = build_tree(2, 3)
        m = SchemeMatrix(k=2, a=(2, 0, 0, 0), b=(0, 0, 2, 0))
        h_star = solve_scalar(2, 0.8)[-1]
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(h_star, 0.0))
        assert verify_compatibility(asg, 0.8, tol=1e-9).passed

    def test_non_root_value_fails(self):
        tree = build_tree(2, 3)
        m = SchemeMatrix(k=2, a=(2, 0, 0, 0), b=(0, 0, 2, 0))
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(1.0, 0.0))
        report = verify_compatibility(asg, 0.8, tol=1e-9)
        assert not report.passed
        assert report.max_residual > 1e-3

    def test_depth_zero_rejected(self):
        tree = build_tree(2, 0)
        m = SchemeMatrix(k=2, a=(2, 0, 0, 0), b=(0, 0, 2, 0))
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(1.0, 0.0))
        with pytest.raises(ValueError):
            verify_compatibility(asg, 0.8)


class TestSerialization:
    def test_round_trip(self):
        tree = build_tree(2, 3)
        m = SchemeMatrix(k=2, a=(1, 0, 1, 0), b=(1, 0, 0, 1))
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(H_STAR_2_08, 0.25))
        text = export_assignment(asg)
        parsed = parse_assignment(text)
        assert parsed.labels == asg.labels
        assert parsed.values == asg.values
        assert parsed.tree.k == 2 and parsed.tree.depth == 3
        assert export_assignment(parsed) == text

    def test_header_format(self):
        tree = build_tree(2, 1)
        m = SchemeMatrix(k=2, a=(2, 0, 0, 0), b=(0, 0, 2, 0))
        asg = assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(1.5, 0.0))
        first = export_assignment(asg).splitlines()[0]
        assert first == "k=2 n=1 h=1.5 l=0.0"

    def test_rejects_truncated(self):
        tree = build_tree(2, 1)
        m = SchemeMatrix(k=2, a=(2, 0, 0, 0), b=(0, 0, 2, 0))
        text = export_assignment(assign_fields(tree, m, FieldLabel.PLUS_H, FieldPair(1.0, 0.0)))
        with pytest.raises(ValueError):
            parse_assignment("\n".join(text.splitlines()[:-1]))
        with pytest.raises(ValueError):
            parse_assignment("")
