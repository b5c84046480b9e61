// Simulates a contaminated high-dimensional sample, runs asymMIP and prints
// what it found next to the planted rows.

#include <hidetify/hidetify.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    using namespace hidetify;
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;

    auto clean = generate_clean(100, 300, derive_seed(seed, {1}));
    ContaminationSpec spec;
    spec.model = ContaminationModel::II_swamping;
    spec.mu = 10.0;
    spec.seed = derive_seed(seed, {2});
    auto sample = contaminate(clean, spec);

    RammParams params;
    params.seed = seed;
    params.threads = 0;
    auto result = run_detector(Detector::asymMIP, sample.data, params);

    std::cout << "planted:";
    for (auto i : sample.truth) std::cout << ' ' << i + 1;
    std::cout << "\nflagged:";
    for (auto i : result.influential) std::cout << ' ' << i + 1;
    auto m = detection_metrics(sample.truth, result.influential, sample.data.rows());
    std::cout << "\nTPR " << m.tpr_inf << "  FPR " << m.fpr_inf << "  rounds " << result.iterations_used << '\n';

    for (const auto& step : result.trace) {
        std::cout << to_string(step.step) << '@' << step.iteration << ": " << step.flagged.size() << " rows\n";
    }
}
