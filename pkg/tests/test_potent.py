import math

import pytest

from topoveil.connectivity import ConnectivityMatrix, extract_connectivity
from topoveil.errors import (
    KeyOutOfRange,
    KeyWidthTooSmall,
    SignalWidthMismatch,
    TooFewSignals,
)
from topoveil.netlist import (
    Cell,
    Netlist,
    Port,
    comb_equivalent,
    evaluate,
    port_value_from_bits,
    synthesize_lite,
)
from topoveil.potent import (
    KeyedSystem,
    ObfSwitch,
    ObfuscatedRouter,
    apply_key,
    effective_permutation,
    generate_switch,
    index_from_permutation,
    induced_mapping_topology,
    integrate,
    keyspace,
    permutation_from_index,
    switch_from_json,
    switch_to_json,
    update_connectivity,
)


def matrix_over(signals, cols=("o",)):
    return ConnectivityMatrix(
        "r", tuple(signals), tuple(cols),
        tuple(tuple(True for _ in cols) for _ in signals))


def next_permutation(seq):
    """Independent lexicographic next-permutation (classic algorithm)."""
    a = list(seq)
    i = len(a) - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return None
    j = len(a) - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1:] = reversed(a[i + 1:])
    return tuple(a)


def test_n4_b5_counts():
    s = generate_switch(matrix_over(["s0", "s1", "s2", "s3"]), 5)
    assert s.valid_keys == 24
    assert s.zero_keys == 8
    assert 1 << s.key_width == 32
    perms = [apply_key(s, k) for k in range(32)]
    assert sum(p is None for p in perms) == 8
    assert all(apply_key(s, k) is None for k in range(24, 32))
    assert len({p for p in perms if p is not None}) == 24


def test_n2_b1_no_zero_keys():
    s = generate_switch(matrix_over(["x", "y"]), 1)
    assert s.zero_keys == 0
    assert apply_key(s, 0) == (0, 1)
    assert apply_key(s, 1) == (1, 0)


def test_key_width_default_and_too_small():
    s = generate_switch(matrix_over(["a", "b", "c"]))
    assert s.key_width == 3  # ceil(log2 3!) = 3
    with pytest.raises(KeyWidthTooSmall):
        generate_switch(matrix_over(["a", "b", "c"]), 2)


def test_too_few_signals():
    with pytest.raises(TooFewSignals):
        generate_switch(matrix_over(["only"]))


def test_switch_uses_preserved_rows_only():
    m = ConnectivityMatrix(
        "r", ("alive0", "dead", "alive1"), ("o",),
        ((True,), (False,), (True,)))
    s = generate_switch(m)
    assert s.signals == ("alive0", "alive1")


def test_lehmer_order_against_next_permutation():
    for n in range(2, 7):
        m = matrix_over([f"s{i}" for i in range(n)])
        s = generate_switch(m)
        current = tuple(range(n))
        seen = set()
        for k in range(math.factorial(n)):
            perm = apply_key(s, k)
            assert perm == current, (n, k)
            assert perm not in seen
            seen.add(perm)
            current = next_permutation(current)
        assert current is None  # enumeration exhausted exactly at n!


def test_lehmer_key3_example():
    s = generate_switch(matrix_over(["a", "b", "c"]), 3)
    assert apply_key(s, 1) == (0, 2, 1)  # swap of the last two signals


def test_index_permutation_roundtrip():
    for n in (2, 3, 4, 5):
        for k in range(math.factorial(n)):
            assert index_from_permutation(permutation_from_index(k, n)) == k


def test_apply_key_out_of_range():
    s = generate_switch(matrix_over(["x", "y"]), 1)
    with pytest.raises(KeyOutOfRange):
        apply_key(s, 2)


def test_effective_permutation_anchors_correct_key():
    s = generate_switch(matrix_over(["s0", "s1", "s2", "s3"]), 5)
    for ck in (0, 7, 13, 23):
        assert effective_permutation(s, ck, ck) == (0, 1, 2, 3)
        seen = {effective_permutation(s, k, ck) for k in range(24)}
        assert len(seen) == 24  # still a bijection onto all permutations
    assert effective_permutation(s, 25, 13) is None


# -- integration -------------------------------------------------------------


def router_fixture():
    cells = [
        Cell.make("c1", "AND", a="s0", b="s1", y="w1"),
        Cell.make("c2", "OR", a="s2", b="extra", y="w2"),
        Cell.make("c3", "XOR", a="w1", b="w2", y="out1"),
        Cell.make("c4", "NOT", a="s3", y="out2"),
    ]
    return Netlist.build(
        "router0",
        [Port("s0", 1), Port("s1", 1), Port("s2", 1), Port("s3", 1),
         Port("extra", 1)],
        [Port("out1", 1), Port("out2", 1)],
        ["s0", "s1", "s2", "s3", "extra", "w1", "w2", "out1", "out2"],
        cells)


def test_integrate_identity_under_correct_key():
    s = generate_switch(matrix_over(["s0", "s1", "s2", "s3"]), 5)
    router = router_fixture()
    for ck in (0, 13, 23):
        obf, _ = integrate(router, s, ck)
        assert obf.port("key").width == 5
        assert comb_equivalent(
            obf, router,
            bind_a={"key": port_value_from_bits(format(ck, "05b"))})


def test_integrate_wrong_key_changes_function():
    s = generate_switch(matrix_over(["s0", "s1", "s2", "s3"]), 5)
    router = router_fixture()
    obf, _ = integrate(router, s, 13)
    wrong = comb_equivalent(
        obf, router, bind_a={"key": port_value_from_bits(format(7, "05b"))})
    assert not wrong


def test_integrate_zero_key_nulls_switch():
    s = generate_switch(matrix_over(["s0", "s1", "s2", "s3"]), 5)
    router = router_fixture()
    obf, _ = integrate(router, s, 13)
    for zero_key in (24, 31):
        kv = port_value_from_bits(format(zero_key, "05b"))
        for vec in range(8):
            out = evaluate(obf, {
                "s0": vec & 1, "s1": (vec >> 1) & 1, "s2": (vec >> 2) & 1,
                "s3": 1, "extra": 0, "key": kv})
            # with all switch outputs clamped low: out1 = 0^(0|extra)=0, out2 = 1
            assert out["out1"] == 0
            assert out["out2"] == 1


def test_integrate_signal_width_mismatch():
    n = Netlist.build(
        "w", [Port("a", 2), Port("b", 1)], [Port("y", 1)],
        ["a[0]", "a[1]", "b", "y"],
        [Cell.make("g", "AND", a="a[0]", b="b", y="y")])
    s = ObfSwitch(signals=("a", "b"), key_width=1)
    with pytest.raises(SignalWidthMismatch):
        integrate(n, s, 0)


def test_integrate_updates_connectivity():
    s = generate_switch(matrix_over(["s0", "s1", "s2", "s3"]), 5)
    router = router_fixture()
    obf, updated = integrate(router, s, 5)
    base = extract_connectivity(
        router, "router0",
        [p.name for p in router.inputs], [p.name for p in router.outputs])
    expected = update_connectivity(base, s)
    assert updated.rows == expected.rows
    assert updated.entries == expected.entries
    # the non-switch input keeps its original row
    i_extra = updated.rows.index("extra")
    assert updated.entries[i_extra] == base.entries[i_extra]


def test_key_bits_survive_optimizer():
    s = generate_switch(matrix_over(["s0", "s1", "s2", "s3"]), 5)
    router = router_fixture()
    obf, _ = integrate(router, s, 9)
    opt = synthesize_lite(obf)
    reach = extract_connectivity(
        opt, "router0", ["key"], [p.name for p in opt.outputs])
    assert any(any(line) for line in reach.entries)
    used = {net for c in opt.cells for net in c.inputs()}
    for t in range(5):
        assert f"key[{t}]" in used


def test_three_switch_system_keys():
    # three 3-signal switches; correct keys 4, 5, 3 realize the identity
    routers = []
    for r in range(3):
        sigs = [f"r{r}s{i}" for i in range(3)]
        net = Netlist.build(
            f"rt{r}", [Port(x, 1) for x in sigs],
            [Port(f"r{r}o{i}", 1) for i in range(3)],
            sigs + [f"r{r}o{i}" for i in range(3)],
            [Cell.make(f"b{i}", "BUF", a=sigs[i], y=f"r{r}o{i}")
             for i in range(3)])
        routers.append(net)
    correct = (4, 5, 3)
    system = []
    for net, ck in zip(routers, correct):
        s = generate_switch(matrix_over([p.name for p in net.inputs]), 3)
        obf, _ = integrate(net, s, ck)
        system.append((net, s, obf, ck))
        assert comb_equivalent(
            obf, net, bind_a={"key": port_value_from_bits(format(ck, "03b"))})

    # wrong keys on switches I and II, correct on III: only III matches
    wrong = (3, 1, 3)
    matches = []
    for (net, s, obf, ck), k in zip(system, wrong):
        matches.append(comb_equivalent(
            obf, net, bind_a={"key": port_value_from_bits(format(k, "03b"))}))
    assert matches == [False, False, True]

    sysk = KeyedSystem(routers=tuple(
        ObfuscatedRouter(obf, s, ck, "key") for (_, s, obf, ck) in system))
    assert keyspace(sysk) == 2 ** 9


def test_keyspace_values():
    s5 = ObfSwitch(signals=("a", "b", "c", "d"), key_width=5)
    assert keyspace(KeyedSystem(routers=(ObfuscatedRouter(None, s5, 0, "key"),))) == 32
    assert keyspace(KeyedSystem(routers=())) == 1
    six = KeyedSystem(routers=tuple(
        ObfuscatedRouter(None, s5, 0, "key") for _ in range(6)))
    assert keyspace(six) == 2 ** 30


def test_induced_mapping_topology_phi():
    s = generate_switch(matrix_over(["x", "y"]), 2)
    t_ok = induced_mapping_topology(s, 1, 1)  # correct key -> identity
    assert all(l.src[0] == f"src_{l.dst[0][5:]}" for l in t_ok.links)
    t_zero = induced_mapping_topology(s, 3, 1)  # zero key -> no links
    assert not t_zero.links


def test_switch_json_roundtrip():
    s = generate_switch(matrix_over(["s0", "s1", "s2", "s3"]), 5)
    text = switch_to_json(s, 13)
    again, ck = switch_from_json(text)
    assert again == s and ck == 13
    assert '"order": "lehmer"' in text
