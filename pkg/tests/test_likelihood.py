import math

import numpy as np
import pytest

from linkagekit import corpus
from linkagekit.errors import (
    InconsistentDataError,
    NullProbabilityZeroError,
    TooLargeToEnumerateError,
)
from linkagekit.likelihood import (
    LN10,
    IndividualObservation,
    LodCurve,
    ObservedData,
    ScoreCategory,
    brute_force_loglik,
    default_chi_grid,
    finney_score,
    lod,
    lod_curve,
    logsumexp,
    mle_recombination,
    pedigree_loglik,
    posterior_genotypes,
    sample_joint_genotypes,
)
from linkagekit.model import Locus, PenetranceModel, Phenotype, TwoLocusModel
from linkagekit.pedigree import Individual, validate_pedigree

from oracles import binomial_mle_chi, grid_scan_chi, meiosis_lod

AFF = Phenotype.AFFECTED
UNAFF = Phenotype.UNAFFECTED


class TestPedigreeLoglik:
    def test_single_founder_heterozygous_marker(self):
        ped = validate_pedigree([Individual("s")])
        model = corpus.recessive_model(0.1, (0.3, 0.7))
        data = ObservedData({"s": IndividualObservation(marker=(0, 1))})
        expected = math.log(2 * 0.3 * 0.7)
        assert pedigree_loglik(ped, model, data, 0.2) == pytest.approx(
            expected, rel=1e-12
        )

    def test_all_unknown_data_gives_likelihood_one(self):
        for case in corpus.build_corpus()[:5]:
            ll = pedigree_loglik(
                case.pedigree, case.model, ObservedData.empty(), 0.3
            )
            assert ll == pytest.approx(0.0, abs=1e-10)

    def test_phase_known_children_match_enumeration(self):
        ped, data, model = corpus.phase_known_meioses(1, 2, "bx")
        for chi in (0.0, 0.1, 0.4, 0.5):
            peel = pedigree_loglik(ped, model, data, chi, method="peel")
            brute = brute_force_loglik(ped, model, data, chi)
            assert peel == pytest.approx(brute, rel=1e-10)

    def test_inconsistent_marker_reports_neg_inf(self):
        # child carries an allele absent from both typed parents
        ped = corpus.trio()
        model = corpus.recessive_model(0.1, (0.5, 0.5))
        data = ObservedData(
            {
                "f": IndividualObservation(marker=(0, 0)),
                "m": IndividualObservation(marker=(0, 0)),
                "c": IndividualObservation(marker=(1, 1)),
            }
        )
        assert pedigree_loglik(ped, model, data, 0.1) == float("-inf")
        assert brute_force_loglik(ped, model, data, 0.1) == float("-inf")

    def test_looped_pedigree_falls_back_to_enumeration(self):
        ped = corpus.sib_mating()
        model = corpus.recessive_model(0.2, (0.5, 0.5))
        data = ObservedData({"e": IndividualObservation(phenotype=AFF)})
        auto = pedigree_loglik(ped, model, data, 0.2)
        brute = brute_force_loglik(ped, model, data, 0.2)
        assert auto == brute

    def test_marker_allele_relabeling_invariance(self):
        # swapping marker allele labels everywhere leaves the likelihood
        # unchanged (founder phase symmetry lifted to the pedigree)
        case = corpus.build_corpus()[7]
        swapped_marker = Locus(
            case.model.marker.name, case.model.marker.frequencies[::-1]
        )
        swapped_model = TwoLocusModel(
            trait=case.model.trait,
            marker=swapped_marker,
            penetrance=case.model.penetrance,
        )
        n = case.model.marker.n_alleles - 1

        def swap(obs):
            if obs.marker is None:
                return obs
            a, b = obs.marker
            return IndividualObservation(
                phenotype=obs.phenotype, marker=(n - b, n - a)
            )

        swapped_data = ObservedData(
            {iid: swap(o) for iid, o in case.data.records.items()}
        )
        for chi in (0.0, 0.2, 0.5):
            original = pedigree_loglik(case.pedigree, case.model, case.data, chi)
            relabeled = pedigree_loglik(
                case.pedigree, swapped_model, swapped_data, chi
            )
            assert original == pytest.approx(relabeled, rel=1e-12)


class TestBruteForce:
    def test_trio_all_unknown(self):
        model = corpus.recessive_model(0.1, (0.5, 0.5))
        ll = brute_force_loglik(corpus.trio(), model, ObservedData.empty(), 0.3)
        assert ll == pytest.approx(0.0, abs=1e-10)

    def test_guard_on_individual_count(self):
        members = [Individual("f"), Individual("m")] + [
            Individual(f"c{k}", father="f", mother="m") for k in range(7)
        ]
        ped = validate_pedigree(members)
        assert len(ped) == 9
        model = corpus.recessive_model(0.1, (0.5, 0.5))
        with pytest.raises(TooLargeToEnumerateError):
            brute_force_loglik(ped, model, ObservedData.empty(), 0.1)

    def test_matches_peeling_on_every_small_corpus_case(self):
        for case in corpus.build_corpus():
            peel = pedigree_loglik(case.pedigree, case.model, case.data, 0.07,
                                   method="peel")
            brute = brute_force_loglik(case.pedigree, case.model, case.data, 0.07)
            assert peel == pytest.approx(brute, rel=1e-10), case.name


class TestLod:
    def test_zero_at_null_exactly(self):
        for case in corpus.build_corpus()[:6]:
            assert lod([(case.pedigree, case.data)], case.model, 0.5) == 0.0

    def test_additive_over_families(self):
        model = corpus.recessive_model(0.1, (0.5, 0.5))
        fam1 = corpus.phase_known_meioses(0, 3, "a")[:2]
        fam2 = corpus.phase_known_meioses(1, 4, "b")[:2]
        for chi in (0.01, 0.1, 0.3):
            combined = lod([fam1, fam2], model, chi)
            separate = lod([fam1], model, chi) + lod([fam2], model, chi)
            assert combined == pytest.approx(separate, abs=1e-12)

    def test_ten_nonrecombinant_meioses(self):
        ped, data, model = corpus.phase_known_meioses(0, 10)
        expected = meiosis_lod(0.0, 10, 0)
        assert expected == pytest.approx(10 * math.log10(2), abs=1e-15)
        assert lod([(ped, data)], model, 0.0) == pytest.approx(expected, rel=1e-10)

    def test_lod_tracks_meiosis_oracle_along_the_curve(self):
        ped, data, model = corpus.phase_known_meioses(2, 6, "curve")
        for chi in (0.05, 0.1, 0.25, 0.4):
            assert lod([(ped, data)], model, chi) == pytest.approx(
                meiosis_lod(chi, 6, 2), rel=1e-10
            )

    def test_inconsistent_data_raise(self):
        ped = corpus.trio()
        model = corpus.recessive_model(0.1, (0.5, 0.5))
        data = ObservedData(
            {
                "f": IndividualObservation(marker=(0, 0)),
                "m": IndividualObservation(marker=(0, 0)),
                "c": IndividualObservation(marker=(1, 1)),
            }
        )
        with pytest.raises(InconsistentDataError):
            lod([(ped, data)], model, 0.2)


class TestLodCurve:
    def test_null_point_required(self):
        from linkagekit.errors import GridMissingNullError

        with pytest.raises(GridMissingNullError):
            LodCurve(chis=(0.0, 0.1), lods=(1.0, 0.5))

    def test_default_grid_contains_exact_null(self):
        grid = default_chi_grid()
        assert grid[0] == 0.0
        assert grid[-1] == 0.5
        assert len(grid) == 51

    def test_curve_from_families_ends_at_zero(self):
        ped, data, model = corpus.phase_known_meioses(1, 3, "cv")
        curve = lod_curve([(ped, data)], model, (0.0, 0.1, 0.3, 0.5))
        assert curve.lods[-1] == 0.0
        assert curve.chis == (0.0, 0.1, 0.3, 0.5)


class TestMle:
    def test_zero_recombinants_maximize_at_boundary(self):
        ped, data, model = corpus.phase_known_meioses(0, 10)
        est = mle_recombination([(ped, data)], model)
        assert est.chi_hat == 0.0
        assert est.max_lod == pytest.approx(10 * math.log10(2), rel=1e-10)
        assert not est.flat

    def test_two_of_ten_recombinants(self):
        ped, data, model = corpus.phase_known_meioses(2, 10)
        est = mle_recombination([(ped, data)], model)
        assert est.chi_hat == pytest.approx(binomial_mle_chi(2, 10), abs=1e-4)
        # grid-scan oracle agrees on the location
        chi_scan, lod_scan = grid_scan_chi(
            lambda c: lod([(ped, data)], model, c)
        )
        assert est.chi_hat == pytest.approx(chi_scan, abs=5e-4)
        assert est.max_lod == pytest.approx(lod_scan, abs=1e-6)

    def test_half_recombinants_are_flat(self):
        ped, data, model = corpus.phase_known_meioses(5, 10)
        est = mle_recombination([(ped, data)], model)
        assert est.flat
        assert est.chi_hat == 0.5
        assert est.max_lod == 0.0


class TestFinneyScore:
    def test_categories_constant_in_eta(self):
        cats = [
            ScoreCategory(null_prob=0.25, prob=lambda eta: 0.25),
            ScoreCategory(null_prob=0.75, prob=lambda eta: 0.75),
        ]
        report = finney_score(cats, [2, 6])
        assert report.score == 0.0
        assert report.information == 0.0

    def test_two_category_family(self):
        cats = [
            ScoreCategory(0.5, lambda eta: (1 + eta) / 2, null_derivative=0.5),
            ScoreCategory(0.5, lambda eta: (1 - eta) / 2, null_derivative=-0.5),
        ]
        report = finney_score(cats, [3, 1])
        assert report.category_scores == (1.0, -1.0)
        assert report.score == 2.0
        assert report.information_per_observation == 1.0
        assert report.information == 4.0

    def test_finite_difference_matches_analytic(self):
        cats_fd = [
            ScoreCategory(0.5, lambda eta: (1 + eta) / 2),
            ScoreCategory(0.5, lambda eta: (1 - eta) / 2),
        ]
        report = finney_score(cats_fd, [3, 1])
        assert report.category_scores[0] == pytest.approx(1.0, rel=1e-9)
        assert report.category_scores[1] == pytest.approx(-1.0, rel=1e-9)

    def test_first_order_lod_relation(self):
        # lod(eta) ~ score * eta * log10(e) for small eta
        cats = [
            ScoreCategory(0.5, lambda eta: (1 + eta) / 2, null_derivative=0.5),
            ScoreCategory(0.5, lambda eta: (1 - eta) / 2, null_derivative=-0.5),
        ]
        counts = [7, 3]
        report = finney_score(cats, counts)
        for eta in (0.01, 0.02, 0.05):
            exact = sum(
                x * math.log10(cat.prob(eta) / cat.null_prob)
                for cat, x in zip(cats, counts)
            )
            linear = report.score * eta * math.log10(math.e)
            assert abs(exact - linear) <= 5 * eta * eta

    def test_null_probability_zero_with_counts_raises(self):
        cats = [
            ScoreCategory(0.0, lambda eta: eta / 2),
            ScoreCategory(1.0, lambda eta: 1 - eta / 2),
        ]
        with pytest.raises(NullProbabilityZeroError):
            finney_score(cats, [1, 1])
        # an unobserved zero-probability category is ignored
        report = finney_score(cats, [0, 4])
        assert report.category_scores[0] == 0.0
        assert report.score == pytest.approx(-2.0, rel=1e-9)

    def test_pedigree_score_matches_finite_difference(self):
        # the derivative of the pedigree log likelihood in eta at the
        # null equals the multinomial efficient score
        ped, data, model = corpus.phase_known_meioses(1, 4, "fd")

        def loglik_at_eta(eta):
            return pedigree_loglik(ped, model, data, (1 - eta) / 2)

        step = 1e-5
        fd_score = (loglik_at_eta(step) - loglik_at_eta(-step)) / (2 * step)
        # category view: each meiosis is recombinant or not
        cats = [
            ScoreCategory(0.5, lambda eta: (1 + eta) / 2, null_derivative=0.5),
            ScoreCategory(0.5, lambda eta: (1 - eta) / 2, null_derivative=-0.5),
        ]
        report = finney_score(cats, [3, 1])
        assert fd_score == pytest.approx(report.score, rel=1e-6)


class TestPosteriors:
    def test_point_mass_for_fully_determined_founder(self):
        ped = validate_pedigree([Individual("s")])
        model = corpus.recessive_model(0.1, (0.5, 0.5))
        data = ObservedData(
            {"s": IndividualObservation(phenotype=AFF, marker=(0, 0))}
        )
        post = posterior_genotypes(ped, model, data, 0.1)
        support = {
            g: p for g, p in post.marginals["s"].items() if p > 0
        }
        # affected recessive with homozygous marker: single phased state
        assert len(support) == 1
        assert next(iter(support.values())) == pytest.approx(1.0, abs=1e-12)

    def test_marginals_sum_to_one(self):
        for case in corpus.build_corpus()[:10]:
            post = posterior_genotypes(case.pedigree, case.model, case.data, 0.2)
            for iid, marginal in post.marginals.items():
                assert sum(marginal.values()) == pytest.approx(1.0, abs=1e-10)

    def test_matches_enumeration_on_trio(self):
        from linkagekit.likelihood import _posterior_by_enumeration

        case = corpus.build_corpus()[0]
        two_pass = posterior_genotypes(case.pedigree, case.model, case.data, 0.15)
        reference = _posterior_by_enumeration(
            case.pedigree, case.model, case.data, 0.15
        )
        for iid in two_pass.marginals:
            for g, p in two_pass.marginals[iid].items():
                assert p == pytest.approx(reference.marginals[iid][g], abs=1e-10)

    def test_normalizer_reproduces_loglik(self):
        for case in corpus.build_corpus():
            post = posterior_genotypes(case.pedigree, case.model, case.data, 0.1)
            ll = pedigree_loglik(case.pedigree, case.model, case.data, 0.1)
            assert post.loglik == pytest.approx(ll, abs=1e-10)

    def test_inconsistent_data_raise(self):
        ped = corpus.trio()
        model = corpus.recessive_model(0.1, (0.5, 0.5))
        data = ObservedData(
            {
                "f": IndividualObservation(marker=(0, 0)),
                "m": IndividualObservation(marker=(0, 0)),
                "c": IndividualObservation(marker=(1, 1)),
            }
        )
        with pytest.raises(InconsistentDataError):
            posterior_genotypes(ped, model, data, 0.1)


class TestJointSampling:
    def test_unconditional_sampling_matches_founder_prior(self):
        ped = validate_pedigree([Individual("s")])
        model = corpus.recessive_model(0.3, (0.4, 0.6))
        rng = np.random.default_rng(5)
        counts = np.zeros(model.n_genotypes)
        n = 20000
        for _ in range(n):
            counts[sample_joint_genotypes(ped, model, ObservedData.empty(), 0.1, rng)["s"]] += 1
        from linkagekit.likelihood import _founder_prior_vector

        expected = _founder_prior_vector(model) * n
        # 3-sigma binomial bands per state
        for obs, exp in zip(counts, expected):
            se = math.sqrt(max(exp * (1 - exp / n), 1.0))
            assert abs(obs - exp) <= 4 * se

    def test_conditional_sampling_respects_evidence(self):
        ped, data, model = corpus.phase_known_meioses(0, 1, "cs")
        fixed = ObservedData(records=corpus.phase_known_setup())
        rng = np.random.default_rng(9)
        for _ in range(200):
            g = sample_joint_genotypes(ped, model, fixed, 0.1, rng)
            father = model.genotype_from_index(g["f"])
            # the father's phase is pinned: (disease,1) / (wild,2)
            assert father.paternal.trait_allele == 0
            assert father.paternal.marker_allele == 0
            assert father.maternal.trait_allele == 1
            assert father.maternal.marker_allele == 1


class TestLogSumExp:
    def test_matches_direct_computation(self):
        rng = np.random.default_rng(3)
        arr = rng.normal(size=(4, 5))
        direct = np.log(np.exp(arr).sum(axis=1))
        assert np.allclose(logsumexp(arr, axis=1), direct)

    def test_all_neg_inf_stays_neg_inf(self):
        arr = np.full((3, 2), -np.inf)
        out = logsumexp(arr, axis=0)
        assert np.all(np.isneginf(out))
        assert logsumexp(arr) == -np.inf

    def test_underflow_safe(self):
        arr = np.array([-1000.0, -1000.0])
        assert logsumexp(arr) == pytest.approx(-1000.0 + math.log(2))
