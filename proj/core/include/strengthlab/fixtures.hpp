#pragma once

#include <map>
#include <string>
#include <vector>

#include <strengthlab/distributions.hpp>
#include <strengthlab/fiducial.hpp>
#include <strengthlab/similarity.hpp>
#include <strengthlab/strength.hpp>

namespace strengthlab {

/// Recorded judgments about a handful of laws, keyed by role. Fixtures hold data
/// only; verdicts come from running the comparison functions on them.
struct ScenarioFixture {
    std::string name;
    ReferenceSet refset = ReferenceSet::continuous();
    ProbeConfig probes;
    std::vector<double> grid;
    std::map<std::string, Distribution> laws;
    SimilarityStore store;

    ProbeFamily family(const std::string& role, double lambda) const;
};

/// Pseudo-random generator output (uniform) against a clinician's forecast of a
/// survival-time change (normal). Generator probes are judged as close as the
/// reference itself; every clinician probe is judged below it.
ScenarioFixture generator_vs_clinician_fixture();

/// Urn of unknown composition, urn of known 50/50 composition and a five-way
/// election forecast. Known-urn probes match the reference; the other two sit
/// below the known urn; the unknown urn and the election are never compared.
ScenarioFixture urns_and_election_fixture();

struct LedgerEntry {
    std::string distribution;  // prior, posterior, fiducial, selector or forecast
    std::string method;
    double lambda = 0.0;
    std::vector<Judgment> judgments;
};

enum class LedgerVariant {
    Plain,   // selector probes tie with the reference self-similarity
    Smiled,  // selector probes sit just below it
};

struct LedgerFixture : ScenarioFixture {
    FiducialModel model{25, 4.0};
    double xbar = 10.0;
    NormalPrior prior{0.0, 100.0};
    std::vector<LedgerEntry> entries;
};

/// Normal-mean case (n = 25, sigma = 2, xbar = 10) with the selector urn of seven
/// red and three blue balls as the analogue for the fiducial probes. With
/// `swap_methods` the bayesian and fiducial tags trade places in every judgment.
LedgerFixture build_ledger_fixture(LedgerVariant variant = LedgerVariant::Plain, bool swap_methods = false);

}  // namespace strengthlab
