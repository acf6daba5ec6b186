import pytest

from spinbath.bath import (DotGeometry, GAAS_SPECIES, NuclearSpecies,
                           bath_components, build_clusters)


@pytest.fixture(scope="session")
def toy_species():
    return NuclearSpecies("toy", gamma=0.0, total_hyperfine=1.0e9,
                          abundance=1.0, spin=0.5)


@pytest.fixture(scope="session")
def toy_geometry():
    # site scale 8 * 13^2 / 1 = 1352: couplings of the 1000 strongest sites
    # span about [0.74, 1.49] of the mean
    return DotGeometry(z0=8e-9, L=13e-9, nu0=1e-27, N_total=1000)


@pytest.fixture(scope="session")
def toy_clusters(toy_species, toy_geometry):
    return tuple(build_clusters(toy_geometry, [toy_species], 50))


@pytest.fixture(scope="session")
def gaas_geometry_small():
    return DotGeometry(z0=7.5e-9, L=25e-9, nu0=2.258e-29, N_total=1_000_000)


@pytest.fixture(scope="session")
def gaas_components(gaas_geometry_small):
    return tuple(bath_components(GAAS_SPECIES, gaas_geometry_small,
                                 n_clusters=6, B_ext=0.04))
