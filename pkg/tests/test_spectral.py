import numpy as np
import pytest

from graphdsp import (
    Graph,
    JordanChain,
    NearDefectiveError,
    cycle_graph,
    decompose,
    dirichlet_form,
    gft,
    igft,
    laplacian_quadratic_form,
    laplacian_total_variation,
    local_variation,
    order_eigenvalues,
    order_frequencies,
    path_graph,
    quadratic_form,
    seminorm,
    total_variation,
    tv_of_chain_vector,
    validate_chain,
)


def dft_matrix(n):
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / n


def match_rows_up_to_scale(f, ref, tol=1e-8):
    """Each row of ``f`` equals some row of ``ref`` times a nonzero scalar."""
    used = set()
    for i in range(f.shape[0]):
        hit = None
        for j in range(ref.shape[0]):
            if j in used:
                continue
            r = ref[j]
            pivot = np.argmax(np.abs(r))
            scale = f[i, pivot] / r[pivot]
            if abs(scale) > 1e-12 and np.abs(f[i] - scale * r).max() < tol:
                hit = j
                break
        if hit is None:
            return False
        used.add(hit)
    return True


def random_diagonalizable(rng, n, directed=True):
    while True:
        a = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.6)
        if not directed:
            a = a + a.T
        if not a.any():
            continue
        g = Graph(a)
        try:
            return g, decompose(g)
        except NearDefectiveError:
            continue


# ---------------------------------------------------------------------------
# decomposition


def test_cycle_eigenvalues_are_roots_of_unity():
    for n in (3, 4, 5, 8):
        b = decompose(cycle_graph(n))
        expect = np.exp(-2j * np.pi * np.arange(n) / n)
        got = sorted(b.eigenvalues, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
        want = sorted(expect, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
        assert np.abs(np.array(got) - np.array(want)).max() < 1e-9


def test_cycle_fourier_matrix_is_dft_up_to_row_scale():
    for n in (4, 8):
        b = decompose(cycle_graph(n))
        assert match_rows_up_to_scale(b.fourier, dft_matrix(n))


def test_c4_storage_order_and_variations():
    b = decompose(cycle_graph(4))
    assert np.allclose(b.eigenvalues, [1, -1j, 1j, -1], atol=1e-12)
    ordering = order_frequencies(b)
    assert list(ordering.order) == [0, 1, 2, 3]
    assert np.allclose(ordering.variations,
                       [0.0, np.sqrt(2), np.sqrt(2), 2.0], atol=1e-12)


def test_path_eigenvalues():
    b = decompose(path_graph(3))
    assert np.allclose(sorted(b.eigenvalues.real), [-np.sqrt(2), 0.0, np.sqrt(2)],
                       atol=1e-12)
    assert np.abs(b.eigenvalues.imag).max() == 0.0


def test_identity_graph_decomposition():
    b = decompose(Graph(np.eye(3)))
    assert np.allclose(b.eigenvalues, [1, 1, 1])
    for k in range(3):
        s = b.graph.signal(np.asarray(b.vectors[:, k]))
        assert total_variation(b.graph, s) < 1e-12


def test_eigenvector_residual_and_inverse():
    rng = np.random.default_rng(17)
    for _ in range(15):
        n = int(rng.integers(2, 20))
        g, b = random_diagonalizable(rng, n, directed=bool(rng.integers(2)))
        a = g.adjacency
        resid = np.abs(a @ b.vectors - b.vectors * b.eigenvalues).max()
        assert resid <= 1e-8 * max(np.abs(a).max(), 1e-30)
        assert np.abs(b.fourier @ b.vectors - np.eye(n)).max() <= 1e-8


def test_eigenvectors_are_l1_normalized():
    rng = np.random.default_rng(23)
    for _ in range(10):
        n = int(rng.integers(2, 16))
        _, b = random_diagonalizable(rng, n)
        norms = np.abs(b.vectors).sum(axis=0)
        assert np.abs(norms - 1.0).max() <= 1e-12


def test_symmetric_graph_gets_real_spectrum():
    rng = np.random.default_rng(31)
    a = rng.random((8, 8))
    a = a + a.T
    b = decompose(Graph(a))
    assert np.abs(b.eigenvalues.imag).max() <= 1e-10
    # stored in descending order of the real part
    assert np.all(np.diff(b.eigenvalues.real) <= 1e-12)


def test_decompose_rejects_zero_graph():
    with pytest.raises(ValueError):
        decompose(Graph(np.zeros((3, 3))))


def test_defective_shift_raises():
    g = Graph([[0.0, 0.0], [1.0, 0.0]])  # one nilpotent Jordan block
    with pytest.raises(NearDefectiveError) as e:
        decompose(g)
    assert e.value.condition > 1e8


def test_decompose_is_deterministic():
    g = cycle_graph(5)
    b1, b2 = decompose(g), decompose(g)
    assert np.array_equal(b1.eigenvalues, b2.eigenvalues)
    assert np.array_equal(b1.vectors, b2.vectors)
    assert b1.graph is g and b2.graph is g


# ---------------------------------------------------------------------------
# transform


def test_gft_of_eigenvector_is_unit_coefficient():
    rng = np.random.default_rng(41)
    g, b = random_diagonalizable(rng, 7)
    for k in range(7):
        shat = gft(b, g.signal(np.asarray(b.vectors[:, k])))
        expect = np.zeros(7)
        expect[k] = 1.0
        assert np.abs(shat - expect).max() < 1e-8


def test_gft_constant_on_cycle_hits_dc_only():
    g = cycle_graph(6)
    b = decompose(g)
    shat = gft(b, g.signal(np.ones(6)))
    dc = int(np.argmin(np.abs(b.eigenvalues - 1.0)))
    mask = np.ones(6, bool)
    mask[dc] = False
    assert abs(shat[dc]) > 1.0
    assert np.abs(shat[mask]).max() < 1e-10


def test_gft_matches_dft_on_cycle_delta():
    g = cycle_graph(8)
    b = decompose(g)
    delta = np.zeros(8)
    delta[2] = 1.0
    shat = gft(b, g.signal(delta))
    # fourier rows are scaled DFT rows, so each |coefficient| must appear
    # in the DFT of the same delta up to the row scaling
    ref = dft_matrix(8) @ delta
    assert match_rows_up_to_scale(shat[:, None], ref[:, None])


def test_round_trip_identity():
    rng = np.random.default_rng(47)
    for directed in (False, True):
        g, b = random_diagonalizable(rng, 11, directed=directed)
        s = rng.standard_normal(11)
        back = igft(b, gft(b, g.signal(s)))
        assert np.abs(back.values - s).max() <= 1e-8
        assert back.graph is g


def test_igft_of_basis_vector_is_eigenvector():
    rng = np.random.default_rng(53)
    g, b = random_diagonalizable(rng, 6)
    e1 = np.zeros(6, complex)
    e1[1] = 1.0
    out = igft(b, e1)
    assert np.abs(out.values - b.vectors[:, 1]).max() < 1e-12


def test_transform_dimension_checks():
    g, b = cycle_graph(4), decompose(cycle_graph(4))
    with pytest.raises(ValueError):
        gft(b, cycle_graph(5).signal(np.zeros(5)))
    with pytest.raises(ValueError):
        igft(b, np.zeros(5))


# ---------------------------------------------------------------------------
# variation measures


def test_total_variation_of_constant_on_cycle_is_zero():
    g = cycle_graph(7)
    assert total_variation(g, g.signal(np.ones(7))) < 1e-14


def test_total_variation_on_small_cycle():
    g = cycle_graph(3)
    assert total_variation(g, g.signal([1.0, 2.0, 3.0])) == pytest.approx(4.0)


def test_eigenvector_variation_formula():
    # for an L1-normalized eigenvector the total variation collapses to
    # |1 - lambda / rho|
    rng = np.random.default_rng(61)
    for _ in range(10):
        n = int(rng.integers(2, 14))
        g, b = random_diagonalizable(rng, n, directed=bool(rng.integers(2)))
        r = g.spectral_radius
        for k in range(n):
            tv = total_variation(g, g.signal(np.asarray(b.vectors[:, k])))
            assert tv == pytest.approx(abs(1 - b.eigenvalues[k] / r), abs=1e-9)


def test_c4_eigenvector_variations_exact():
    g = cycle_graph(4)
    b = decompose(g)
    got = [total_variation(g, g.signal(np.asarray(b.vectors[:, k])))
           for k in range(4)]
    assert np.allclose(got, [0.0, np.sqrt(2), np.sqrt(2), 2.0], atol=1e-12)


def test_eigenvector_variation_never_exceeds_two():
    rng = np.random.default_rng(67)
    for _ in range(20):
        n = int(rng.integers(2, 16))
        g, b = random_diagonalizable(rng, n, directed=bool(rng.integers(2)))
        ordering = order_frequencies(b)
        assert ordering.variations.min() >= -1e-12
        assert ordering.variations.max() <= 2.0 + 1e-9


def test_variation_measures_reject_zero_graph():
    g = Graph(np.zeros((3, 3)))
    s = g.signal(np.ones(3))
    with pytest.raises(ValueError):
        total_variation(g, s)
    with pytest.raises(ValueError):
        quadratic_form(g, s)


def test_local_variation_sums_to_total():
    rng = np.random.default_rng(71)
    g, _ = random_diagonalizable(rng, 9)
    s = g.signal(rng.standard_normal(9))
    parts = [local_variation(g, s, n) for n in range(9)]
    assert sum(parts) == pytest.approx(total_variation(g, s), rel=1e-12)
    with pytest.raises(ValueError):
        local_variation(g, s, 9)
    with pytest.raises(ValueError):
        local_variation(g, s, -1)


def test_local_variation_on_cycle():
    g = cycle_graph(3)
    s = g.signal([1.0, 2.0, 3.0])
    assert local_variation(g, s, 0) == pytest.approx(2.0)
    assert local_variation(g, s, 1) == pytest.approx(1.0)


def test_dirichlet_form_special_cases():
    rng = np.random.default_rng(73)
    g, _ = random_diagonalizable(rng, 8)
    s = g.signal(rng.standard_normal(8))
    assert dirichlet_form(g, s, 1) == pytest.approx(total_variation(g, s))
    assert dirichlet_form(g, s, 2) == pytest.approx(quadratic_form(g, s))
    with pytest.raises(ValueError):
        dirichlet_form(g, s, 0.5)


def test_dirichlet_form_of_constant_cycle_is_zero():
    g = cycle_graph(5)
    for p in (1, 1.5, 2, 3):
        assert dirichlet_form(g, g.signal(np.ones(5)), p) < 1e-14


def test_quadratic_form_on_small_cycle():
    g = cycle_graph(3)
    assert quadratic_form(g, g.signal([1.0, 2.0, 3.0])) == pytest.approx(3.0)
    assert seminorm(g, g.signal([1.0, 2.0, 3.0])) == pytest.approx(np.sqrt(3.0))


def test_quadratic_form_matches_matrix_expression():
    rng = np.random.default_rng(79)
    for _ in range(10):
        n = int(rng.integers(2, 12))
        g, _ = random_diagonalizable(rng, n, directed=bool(rng.integers(2)))
        s = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        m = np.eye(n) - g.adjacency / g.spectral_radius
        expect = 0.5 * np.real(np.conj(s) @ (m.conj().T @ m) @ s)
        assert quadratic_form(g, g.signal(s)) == pytest.approx(expect, rel=1e-10)


def test_eigenvector_quadratic_form_scales_with_l2_norm_squared():
    rng = np.random.default_rng(83)
    g, b = random_diagonalizable(rng, 9)
    r = g.spectral_radius
    for k in range(9):
        v = np.asarray(b.vectors[:, k])
        expect = 0.5 * abs(1 - b.eigenvalues[k] / r) ** 2 * np.linalg.norm(v) ** 2
        assert quadratic_form(g, g.signal(v)) == pytest.approx(expect, abs=1e-10)


def test_seminorm_homogeneity_and_triangle():
    rng = np.random.default_rng(89)
    g, _ = random_diagonalizable(rng, 10)
    for _ in range(20):
        s = rng.standard_normal(10)
        t = rng.standard_normal(10)
        c = rng.standard_normal()
        assert seminorm(g, g.signal(c * s)) == pytest.approx(
            abs(c) * seminorm(g, g.signal(s)), abs=1e-10)
        assert seminorm(g, g.signal(s + t)) <= \
            seminorm(g, g.signal(s)) + seminorm(g, g.signal(t)) + 1e-10


# ---------------------------------------------------------------------------
# generalized eigenvectors


def chain_graph():
    # single nilpotent block: edge from node 0 to node 1 only
    return Graph([[0.0, 1.0], [0.0, 0.0]])


def test_validate_chain():
    g = chain_graph()
    chain = JordanChain(0.0, (np.array([1.0, 0.0]), np.array([0.0, 1.0])))
    validate_chain(g, chain)
    bad = JordanChain(0.0, (np.array([1.0, 0.0]), np.array([1.0, 0.0])))
    with pytest.raises(ValueError):
        validate_chain(g, bad)
    with pytest.raises(ValueError):
        validate_chain(g, JordanChain(0.5, (np.array([1.0, 0.0]),)))


def test_chain_vector_variation_beyond_the_eigenvector():
    g = chain_graph()
    chain = JordanChain(0.0, (np.array([1.0, 0.0]), np.array([0.0, 1.0])))
    # the graph itself has spectral radius zero, so the caller supplies
    # the normalization constant
    tv0 = tv_of_chain_vector(g, chain, 0, lambda_max_abs=2.0)
    tv1 = tv_of_chain_vector(g, chain, 1, lambda_max_abs=2.0)
    assert tv0 == pytest.approx(1.0)          # |1 - 0/2| for the eigenvector
    assert tv1 == pytest.approx(1.0 + 0.5)    # picks up the chain coupling
    with pytest.raises(ValueError):
        tv_of_chain_vector(g, chain, 2, lambda_max_abs=2.0)
    with pytest.raises(ValueError):
        tv_of_chain_vector(g, chain, 0)  # radius 0 and no override


def test_chain_of_length_one_matches_plain_eigenvector():
    g = cycle_graph(4)
    b = decompose(g)
    k = 1
    chain = JordanChain(complex(b.eigenvalues[k]),
                        (np.asarray(b.vectors[:, k]),))
    tv = tv_of_chain_vector(g, chain, 0)
    assert tv == pytest.approx(abs(1 - b.eigenvalues[k]), abs=1e-12)


def test_perron_chain_vector_has_zero_variation():
    g = Graph(2 * np.eye(2))
    chain = JordanChain(2.0, (np.array([0.5, 0.5]),))
    assert tv_of_chain_vector(g, chain, 0) == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# frequency ordering


def test_order_real_spectrum_descending():
    w = np.array([3.0, 1.0, -2.0], dtype=complex)
    got = order_eigenvalues(w, 3.0)
    assert list(got.order) == [0, 1, 2]
    assert np.allclose(got.variations, [0.0, 2 / 3, 5 / 3])


def test_order_handles_conjugate_ties_by_imag():
    w = np.array([1.0, 0.5 - 0.5j, 0.5 + 0.5j], dtype=complex)
    assert list(order_eigenvalues(w, 1.0).order) == [0, 1, 2]
    flipped = np.array([1.0, 0.5 + 0.5j, 0.5 - 0.5j], dtype=complex)
    assert list(order_eigenvalues(flipped, 1.0).order) == [0, 2, 1]


def test_tv_and_quadratic_orderings_agree():
    rng = np.random.default_rng(97)
    for _ in range(25):
        n = int(rng.integers(2, 18))
        _, b = random_diagonalizable(rng, n, directed=bool(rng.integers(2)))
        a = order_frequencies(b, form="tv")
        q = order_frequencies(b, form="quadratic")
        assert list(a.order) == list(q.order)
        assert np.allclose(q.variations, a.variations ** 2, atol=1e-12)


def test_order_frequencies_rejects_unknown_form():
    b = decompose(cycle_graph(4))
    with pytest.raises(ValueError):
        order_frequencies(b, form="cubic")


def test_undirected_variation_ranks_follow_descending_eigenvalue():
    # real spectra sorted descending are already variation-sorted, so the
    # permutation is the identity
    rng = np.random.default_rng(101)
    for _ in range(10):
        n = int(rng.integers(3, 14))
        a = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
        a = a + a.T
        if not a.any():
            continue
        b = decompose(Graph(a))
        assert list(order_frequencies(b).order) == list(range(n))


def test_directed_ordering_matches_distance_from_radius():
    rng = np.random.default_rng(103)
    for _ in range(15):
        n = int(rng.integers(3, 16))
        g, b = random_diagonalizable(rng, n)
        r = g.spectral_radius
        w = b.eigenvalues
        expect = np.lexsort((np.arange(n), w.imag, -w.real, np.abs(r - w)))
        assert list(order_frequencies(b).order) == list(expect)


# ---------------------------------------------------------------------------
# Laplacian-based measures


def undirected_cycle(n):
    a = np.zeros((n, n))
    for i in range(n):
        a[i, (i + 1) % n] = a[(i + 1) % n, i] = 1.0
    return Graph(a)


def test_laplacian_total_variation_basic():
    g = Graph([[0.0, 1.0], [1.0, 0.0]])
    assert laplacian_total_variation(g, g.signal([0.0, 1.0])) == pytest.approx(2.0)
    assert laplacian_total_variation(g, g.signal([1.0, 1.0])) == 0.0


def test_laplacian_total_variation_absolute_homogeneity():
    rng = np.random.default_rng(107)
    g = undirected_cycle(6)
    s = rng.standard_normal(6)
    base = laplacian_total_variation(g, g.signal(s))
    assert laplacian_total_variation(g, g.signal(-3 * s)) == pytest.approx(3 * base)


def test_laplacian_quadratic_form_values():
    g = Graph([[0.0, 1.0], [1.0, 0.0]])
    assert laplacian_quadratic_form(g, g.signal([0.0, 1.0])) == pytest.approx(1.0)
    c4 = undirected_cycle(4)
    v = np.array([1.0, -1.0, 1.0, -1.0]) / 2
    beta = 4.0
    assert laplacian_quadratic_form(c4, c4.signal(v)) == pytest.approx(
        beta * np.linalg.norm(v) ** 2)


def test_laplacian_quadratic_form_nonnegative():
    rng = np.random.default_rng(109)
    for _ in range(10):
        n = int(rng.integers(2, 12))
        a = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
        a = (a + a.T) / 2
        np.fill_diagonal(a, 0.0)
        g = Graph(a)
        s = g.signal(rng.standard_normal(n))
        assert laplacian_quadratic_form(g, s) >= -1e-10


def test_laplacian_measures_reject_directed_graphs():
    g = cycle_graph(4)
    s = g.signal(np.ones(4))
    with pytest.raises(ValueError):
        laplacian_total_variation(g, s)
    with pytest.raises(ValueError):
        laplacian_quadratic_form(g, s)


def test_laplacian_quadratic_form_rejects_complex_signal():
    g = undirected_cycle(4)
    with pytest.raises(ValueError):
        laplacian_quadratic_form(g, g.signal(np.ones(4) * 1j))
