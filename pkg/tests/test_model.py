import itertools
import math

import numpy as np
import pytest

from linkagekit.errors import InvalidLocusError, ModelError
from linkagekit.model import (
    Haplotype,
    Locus,
    PenetranceModel,
    PhasedGenotype,
    Phenotype,
    RecombinationParam,
    TwoLocusModel,
    founder_prior,
    penetrance_prob,
    transmission_prob,
)


def biallelic(trait_freqs=(0.5, 0.5), marker_freqs=(0.5, 0.5)):
    return (
        Locus("trait", trait_freqs),
        Locus("marker", marker_freqs),
    )


DOUBLY_HET = PhasedGenotype(Haplotype(0, 0), Haplotype(1, 1))


class TestLocus:
    def test_frequencies_must_sum_to_one(self):
        with pytest.raises(InvalidLocusError):
            Locus("bad", (0.5, 0.6))

    def test_negative_frequency_rejected(self):
        with pytest.raises(InvalidLocusError):
            Locus("bad", (-0.1, 1.1))

    def test_zero_frequency_declares_absent_allele(self):
        locus = Locus("ok", (0.0, 1.0))
        assert locus.n_alleles == 2

    def test_allele_names_round_trip(self):
        locus = Locus("named", (0.3, 0.7), alleles=("d", "+"))
        assert locus.allele_index("d") == 0
        assert locus.allele_name(1) == "+"


class TestRecombinationParam:
    def test_eta_relation(self):
        r = RecombinationParam(chi=0.1)
        assert r.eta == pytest.approx(0.8, abs=0)
        assert RecombinationParam.from_eta(0.0).chi == 0.5

    def test_null_is_eta_zero(self):
        assert RecombinationParam(chi=0.5).eta == 0.0

    def test_out_of_range_rejected(self):
        with pytest.raises(ModelError):
            RecombinationParam(chi=0.6)


class TestFounderPrior:
    def test_uniform_biallelic_gives_one_sixteenth(self):
        trait, marker = biallelic()
        for g in TwoLocusModel(
            trait, marker, PenetranceModel.from_dict({(0, 0): 1, (0, 1): 1, (1, 1): 1})
        ).phased_genotypes():
            assert founder_prior(g, trait, marker) == pytest.approx(1 / 16, abs=0)

    def test_direct_product(self):
        trait = Locus("trait", (0.01, 0.99))
        marker = Locus("marker", (0.3, 0.7))
        g = PhasedGenotype(Haplotype(0, 0), Haplotype(0, 0))
        assert founder_prior(g, trait, marker) == pytest.approx(9e-6, rel=1e-12)

    def test_sums_to_one_over_all_phased_genotypes(self):
        trait = Locus("trait", (0.2, 0.3, 0.5))
        marker = Locus("marker", (0.1, 0.9))
        model = TwoLocusModel(
            trait,
            marker,
            PenetranceModel.from_dict(
                {(i, j): 0.5 for i in range(3) for j in range(i, 3)}
            ),
        )
        total = sum(founder_prior(g, trait, marker) for g in model.phased_genotypes())
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_phase_swap_invariance(self):
        trait = Locus("trait", (0.15, 0.85))
        marker = Locus("marker", (0.4, 0.6))
        rng = np.random.default_rng(7)
        for _ in range(50):
            g = PhasedGenotype(
                Haplotype(int(rng.integers(2)), int(rng.integers(2))),
                Haplotype(int(rng.integers(2)), int(rng.integers(2))),
            )
            assert founder_prior(g, trait, marker) == founder_prior(
                g.phase_swapped(), trait, marker
            )


class TestTransmission:
    def test_no_recombination(self):
        r = RecombinationParam(0.0)
        assert transmission_prob(DOUBLY_HET, Haplotype(0, 0), r) == 0.5
        assert transmission_prob(DOUBLY_HET, Haplotype(1, 1), r) == 0.5
        assert transmission_prob(DOUBLY_HET, Haplotype(0, 1), r) == 0.0

    def test_free_recombination(self):
        r = RecombinationParam(0.5)
        for t in range(2):
            for m in range(2):
                assert transmission_prob(DOUBLY_HET, Haplotype(t, m), r) == 0.25

    def test_partial_recombination(self):
        r = RecombinationParam(0.1)
        assert transmission_prob(DOUBLY_HET, Haplotype(0, 0), r) == pytest.approx(0.45)
        assert transmission_prob(DOUBLY_HET, Haplotype(0, 1), r) == pytest.approx(0.05)

    def test_sums_to_one_over_gametes(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            parent = PhasedGenotype(
                Haplotype(int(rng.integers(3)), int(rng.integers(2))),
                Haplotype(int(rng.integers(3)), int(rng.integers(2))),
            )
            r = RecombinationParam(float(rng.uniform(0, 0.5)))
            total = sum(
                transmission_prob(parent, Haplotype(t, m), r)
                for t in range(3)
                for m in range(2)
            )
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_invariant_under_parental_haplotype_swap(self):
        r = RecombinationParam(0.2)
        parent = PhasedGenotype(Haplotype(0, 1), Haplotype(1, 0))
        swapped = parent.phase_swapped()
        for t in range(2):
            for m in range(2):
                gamete = Haplotype(t, m)
                assert transmission_prob(parent, gamete, r) == transmission_prob(
                    swapped, gamete, r
                )

    def test_factorizes_at_free_recombination(self):
        r = RecombinationParam(0.5)
        parent = PhasedGenotype(Haplotype(0, 1), Haplotype(1, 0))

        def single_locus(allele, pair):
            return (int(pair[0] == allele) + int(pair[1] == allele)) / 2.0

        trait_pair = (0, 1)
        marker_pair = (1, 0)
        for t in range(2):
            for m in range(2):
                product = single_locus(t, trait_pair) * single_locus(m, marker_pair)
                assert transmission_prob(parent, Haplotype(t, m), r) == pytest.approx(
                    product, abs=1e-15
                )


class TestPenetrance:
    recessive = PenetranceModel.from_dict({(0, 0): 1.0, (0, 1): 0.0, (1, 1): 0.0})
    partial = PenetranceModel.from_dict({(0, 0): 0.8, (0, 1): 0.8, (1, 1): 0.05})

    def test_fully_penetrant_recessive(self):
        dd = PhasedGenotype(Haplotype(0, 0), Haplotype(0, 0))
        dplus = PhasedGenotype(Haplotype(0, 0), Haplotype(1, 0))
        assert penetrance_prob(Phenotype.AFFECTED, dd, self.recessive) == 1.0
        assert penetrance_prob(Phenotype.AFFECTED, dplus, self.recessive) == 0.0

    def test_partial_penetrance_with_phenocopies(self):
        het = PhasedGenotype(Haplotype(0, 0), Haplotype(1, 0))
        homref = PhasedGenotype(Haplotype(1, 0), Haplotype(1, 0))
        assert penetrance_prob(Phenotype.AFFECTED, het, self.partial) == 0.8
        assert penetrance_prob(Phenotype.AFFECTED, homref, self.partial) == 0.05

    def test_unknown_phenotype_carries_no_information(self):
        for i, j in itertools.combinations_with_replacement(range(2), 2):
            g = PhasedGenotype(Haplotype(i, 0), Haplotype(j, 0))
            assert penetrance_prob(Phenotype.UNKNOWN, g, self.partial) == 1.0

    def test_unaffected_is_complement(self):
        het = PhasedGenotype(Haplotype(0, 0), Haplotype(1, 0))
        assert penetrance_prob(Phenotype.UNAFFECTED, het, self.partial) == pytest.approx(
            0.2
        )

    def test_table_must_cover_all_genotypes(self):
        with pytest.raises(ModelError):
            TwoLocusModel(
                Locus("trait", (0.5, 0.5)),
                Locus("marker", (0.5, 0.5)),
                PenetranceModel.from_dict({(0, 0): 1.0}),
            )
