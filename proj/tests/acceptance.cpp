// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <hidetify/hidetify.hpp>

#include "commands.hpp"
#include "oracle.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace hidetify;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
    std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

constexpr std::size_t kN = 100;
constexpr std::size_t kP = 300;
constexpr std::size_t kReps = 50;
constexpr std::uint64_t kSeed = 20240501;

// ---------------------------------------------------------------------------

void expectile_oracle() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> size(2, 50);
    std::uniform_int_distribution<int> level(1, 9);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> y(size(rng));
        double s = scale(rng);
        double shift = 10.0 * z(rng);
        for (auto& v : y) v = shift + s * (trial % 2 ? z(rng) : std::exp(z(rng)));
        double tau = level(rng) / 10.0;
        double o = oracle::expectile_bisect(y, tau);
        worst = std::max(worst, std::abs(empirical_expectile(y, tau) - o) / (1.0 + std::abs(o)));
    }
    double secs = seconds_since(t0);
    report(1, "expectile IRLS vs 1-D minimizer, 1000 pairs", worst < 1e-6 && secs < 10.0,
           fmt("max relative gap %.3g", worst) + fmt(", %.2f s", secs));
}

void pearson_reduction() {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> size(3, 200);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        std::size_t n = size(rng);
        std::vector<double> x(n), y(n);
        double rho = std::tanh(z(rng));
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = 5.0 + 3.0 * z(rng);
            y[i] = rho * x[i] + z(rng);
        }
        worst = std::max(worst, std::abs(asymmetric_correlation(x, y, 0.5) - oracle::pearson(x, y)));
    }
    report(2, "tau=0.5 correlation equals Pearson, 100 pairs", worst < 1e-10, fmt("max gap %.3g", worst));
}

void influence_oracle() {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> rows(6, 12);
    std::uniform_int_distribution<int> cols(1, 5);
    const ExpectileSequence taus = ExpectileSequence::standard();
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::size_t n = rows(rng), p = cols(rng);
        auto d = oracle::random_data(n, p, rng);
        for (std::size_t k = 0; k < n; ++k) {
            auto rest = oracle::everyone_but(n, k);
            double sum = 0.0;
            for (double tau : taus) {
                double o = oracle::influence(d, rest, k, tau);
                worst = std::max(worst, std::abs(loo_influence(d, k, tau) - o));
                sum += o;
            }
            worst = std::max(worst, std::abs(asym_him(d, k, taus) - sum));

            std::size_t nk = 2 + (k % (n - 3));
            auto family = SubsetFamily::draw(all_rows(n), k, 3, nk, 100 + t);
            double lo = 1e300, hi = 0.0;
            for (double tau : taus) {
                auto got = subset_influence(d, family, tau);
                for (std::size_t r = 0; r < family.count(); ++r) {
                    double o = oracle::influence(d, family.subsets[r], k, tau);
                    worst = std::max(worst, std::abs(got[r] - o));
                }
            }
            for (const auto& s : family.subsets) {
                double total = 0.0;
                for (double tau : taus) {
                    double v = oracle::influence(d, s, k, tau);
                    lo = std::min(lo, v);
                    total += v;
                }
                hi = std::max(hi, total);
            }
            double scale = static_cast<double>((nk + 1) * (nk + 1));
            worst = std::max(worst, std::abs(asym_t_min(d, family, taus).statistic - scale * lo));
            worst = std::max(worst, std::abs(asym_t_max(d, family, taus).statistic - scale * hi));
        }
    }
    report(3, "influence statistics vs direct definitions, 20 datasets", worst < 1e-10, fmt("max gap %.3g", worst));
}

void null_calibration() {
    auto t0 = Clock::now();
    const std::size_t n = 100, p = 200, reps = 100;
    const ExpectileSequence taus = ExpectileSequence::standard();
    std::vector<double> tmin, tmax;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        auto clean = generate_clean(n, p, derive_seed(kSeed, {4, rep}));
        // Null model: the response carries no signal.
        auto rng = make_rng(kSeed, {4, rep, 1});
        std::normal_distribution<double> z;
        std::vector<double> x;
        for (std::size_t j = 0; j < p; ++j) {
            auto c = clean.data.column(j);
            x.insert(x.end(), c.begin(), c.end());
        }
        std::vector<double> y(n);
        for (auto& v : y) v = z(rng);
        DataMatrix d(n, p, x, y);
        InfluenceWorkspace ws;
        auto pool = all_rows(n);
        for (std::size_t k = 0; k < n; ++k) {
            auto family = SubsetFamily::draw(pool, k, 5, n / 2, derive_seed(kSeed, {4, rep, k}));
            auto s = subset_scores(d, family, taus, ws);
            tmin.push_back(s.t_min.statistic);
            tmax.push_back(s.t_max.statistic);
        }
    }
    double ks_min = oracle::ks_distance(tmin, [](double v) { return oracle::chi2_cdf(v, 1.0); });
    double ks_max = oracle::ks_distance(tmax, [](double v) { return oracle::chi2_cdf(v, 3.0); });
    double secs = seconds_since(t0);
    report(4, "null calibration of asymT_min/asymT_max", ks_min < 0.10 && ks_max < 0.10 && secs < 900.0,
           fmt("KS(t_min, chi2(1)) %.4f", ks_min) + fmt(", KS(t_max, chi2(3)) %.4f", ks_max) + fmt(", %.0f s", secs));
}

// ---------------------------------------------------------------------------

struct Replicate {
    std::vector<std::size_t> truth;
    DetectionResult result;
};

/// Detector runs on the same replicate samples the benchmark harness would draw.
std::vector<Replicate> run_replicates(ContaminationModel model, double mu, Detector det) {
    SimulationConfig cfg;
    cfg.contamination = {model, mu, 0.15, 0};
    cfg.n = kN;
    cfg.p = kP;
    cfg.seed = derive_seed(kSeed, {static_cast<std::uint64_t>(model), static_cast<std::uint64_t>(mu * 10)});
    std::vector<Replicate> out(kReps);
    parallel_for(kReps, 0, [&](std::size_t rep) {
        auto sample = detail::replicate_sample(cfg, rep);
        auto params = detail::replicate_params(cfg, rep);
        out[rep] = {sample.truth, run_detector(det, sample.data, params)};
    });
    return out;
}

double mean_of(const std::vector<Replicate>& reps, double (*metric)(const Replicate&)) {
    double s = 0.0;
    for (const auto& r : reps) s += metric(r);
    return s / static_cast<double>(reps.size());
}

double tpr(const Replicate& r) { return detection_metrics(r.truth, r.result.influential, kN).tpr_inf; }
double fpr(const Replicate& r) { return detection_metrics(r.truth, r.result.influential, kN).fpr_inf; }

double recall(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& flagged) {
    if (truth.empty()) return 1.0;
    std::size_t hit = 0;
    for (auto t : truth) hit += std::find(flagged.begin(), flagged.end(), t) != flagged.end();
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

const StepRecord& first_step(const DetectionResult& r, StepKind kind) {
    for (const auto& s : r.trace)
        if (s.step == kind) return s;
    throw std::logic_error("step missing from trace");
}

std::map<std::pair<int, int>, std::vector<Replicate>> asym_runs;

const std::vector<Replicate>& asym_mip(ContaminationModel model, double mu) {
    auto key = std::make_pair(static_cast<int>(model), static_cast<int>(mu));
    auto it = asym_runs.find(key);
    if (it == asym_runs.end()) {
        auto t0 = Clock::now();
        it = asym_runs.emplace(key, run_replicates(model, mu, Detector::asymMIP)).first;
        std::printf("  (asymMIP, model %s, mu %g: %zu replications in %.0f s)\n", to_string(model), mu, kReps,
                    seconds_since(t0));
        std::fflush(stdout);
    }
    return it->second;
}

void masking_power() {
    const auto& asym = asym_mip(ContaminationModel::I_masking, 10.0);
    auto mip = run_replicates(ContaminationModel::I_masking, 10.0, Detector::MIP);
    double a = mean_of(asym, tpr), m = mean_of(mip, tpr);
    report(5, "masking power, model I mu=10", a >= 0.90 && a > m,
           fmt("mean TPR asymMIP %.3f", a) + fmt(", MIP %.3f", m));
}

void error_control() {
    bool pass = true;
    std::string detail;
    for (auto model : {ContaminationModel::I_masking, ContaminationModel::II_swamping, ContaminationModel::III_mixed}) {
        for (double mu : {4.0, 10.0}) {
            double f = mean_of(asym_mip(model, mu), fpr);
            pass = pass && f <= 0.07;
            detail += std::string(detail.empty() ? "" : ", ") + to_string(model) + fmt("/%g ", mu) + fmt("%.3f", f);
        }
    }
    report(6, "error control, mean FPR asymMIP <= 0.07", pass, detail);
}

void complementarity() {
    const auto& swamp = asym_mip(ContaminationModel::II_swamping, 10.0);
    const auto& mask = asym_mip(ContaminationModel::I_masking, 10.0);
    double min_recall = 0.0;
    for (const auto& r : swamp) min_recall += recall(r.truth, first_step(r.result, StepKind::min).flagged);
    min_recall /= static_cast<double>(swamp.size());

    double max_recall = 0.0;
    for (const auto& r : mask) {
        const auto& min_flags = first_step(r.result, StepKind::min).flagged;
        std::vector<std::size_t> remaining;
        for (auto t : r.truth)
            if (std::find(min_flags.begin(), min_flags.end(), t) == min_flags.end()) remaining.push_back(t);
        max_recall += recall(remaining, first_step(r.result, StepKind::max).flagged);
    }
    max_recall /= static_cast<double>(mask.size());

    auto good_share = [](const std::vector<Replicate>& reps) {
        std::size_t good = 0;
        for (const auto& r : reps) good += tpr(r) >= 0.9 && fpr(r) <= 0.05;
        return static_cast<double>(good) / static_cast<double>(reps.size());
    };
    double share_ii = good_share(swamp), share_i = good_share(mask);
    bool pass = min_recall >= 0.5 && max_recall >= 0.9 && share_ii >= 0.6 && share_i >= 0.6;
    report(7, "swamping/masking complementarity", pass,
           fmt("model II Min-step recall %.3f", min_recall) + fmt(", model I Max-step recall %.3f", max_recall) +
               fmt(", clean-sweep share II %.2f", share_ii) + fmt(" / I %.2f", share_i));
}

void downstream() {
    auto t0 = Clock::now();
    SimulationConfig cfg;
    cfg.contamination = {ContaminationModel::I_masking, 8.0, 0.15, 0};
    cfg.n = kN;
    cfg.p = kP;
    cfg.replications = kReps;
    cfg.seed = derive_seed(kSeed, {8});
    cfg.threads = 0;
    std::mutex mu;
    std::size_t fits = 0;
    double worst_kkt = -1.0;
    cfg.on_fit = [&](const DataMatrix& train, const LassoFit& fit) {
        double v = kkt_violation(train, fit);
        std::lock_guard lock(mu);
        ++fits;
        worst_kkt = std::max(worst_kkt, v);
    };
    auto records = compare_pipelines(cfg, {Method::raw(), Method{Detector::asymMIP}});
    auto m = [&](const char* method, const char* metric) { return mean_metric(records, method, metric); };
    double err_raw = m("RawData", "err"), err_asym = m("asymMIP", "err");
    double fpr_raw = m("RawData", "fpr"), fpr_asym = m("asymMIP", "fpr");
    double tpr_raw = m("RawData", "tpr"), tpr_asym = m("asymMIP", "tpr");
    report(8, "downstream benefit, model I mu=8", err_asym < err_raw && fpr_asym < fpr_raw && tpr_asym > tpr_raw,
           fmt("ERR raw %.4f", err_raw) + fmt(" vs asymMIP %.4f", err_asym) + fmt(", FPR raw %.4f", fpr_raw) +
               fmt(" vs %.4f", fpr_asym) + fmt(", TPR raw %.4f", tpr_raw) + fmt(" vs %.4f", tpr_asym) +
               fmt(", %.0f s", seconds_since(t0)));
    report(9, "lasso KKT certification", fits > 0 && worst_kkt <= 1e-6,
           std::to_string(fits) + fmt(" fits, worst violation %.3g", worst_kkt));
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_tool(const std::string& args) {
    std::string cmd = std::string(HIDETIFY_TOOL_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism() {
    auto dir = fs::temp_directory_path() / ("hidetify_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto sample = (dir / "sample.csv").string();
    bool pass = run_tool("generate --model III --n 60 --p 80 --seed 5 --out " + sample) == 0;
    std::vector<std::string> detect_files, detect_meta, sim_files;
    for (const char* threads : {"1", "2", "4", "0"}) {
        auto out = (dir / ("report_" + std::string(threads) + ".csv")).string();
        pass = pass && run_tool("detect --input " + sample + " --seed 12 --threads " + threads + " --out " + out) == 0;
        detect_files.push_back(slurp(out));
        detect_meta.push_back(slurp(out + ".meta.json"));
        auto sim = (dir / ("sim_" + std::string(threads) + ".csv")).string();
        pass = pass && run_tool("simulate --model II --n 40 --p 30 --replications 3 --seed 12 --threads " +
                                std::string(threads) + " --out " + sim) == 0;
        sim_files.push_back(slurp(sim));
    }
    // A repeat with the same thread count.
    auto again = (dir / "report_again.csv").string();
    pass = pass && run_tool("detect --input " + sample + " --seed 12 --threads 1 --out " + again) == 0;
    detect_files.push_back(slurp(again));
    for (std::size_t i = 1; i < detect_files.size(); ++i) pass = pass && detect_files[i] == detect_files[0];
    for (std::size_t i = 1; i < detect_meta.size(); ++i) pass = pass && detect_meta[i] == detect_meta[0];
    for (std::size_t i = 1; i < sim_files.size(); ++i) pass = pass && sim_files[i] == sim_files[0];
    pass = pass && !detect_files[0].empty() && !sim_files[0].empty();
    fs::remove_all(dir);
    report(10, "byte-identical outputs across repeats and thread counts", pass,
           "detect and simulate with --threads 1, 2, 4, 0");
}

}  // namespace

int main(int argc, char** argv) {
    // Optional filter: run only the listed criteria, e.g. `acceptance 1 2 3`.
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
    auto t0 = Clock::now();
    try {
        if (want(1)) expectile_oracle();
        if (want(2)) pearson_reduction();
        if (want(3)) influence_oracle();
        if (want(10)) determinism();
        if (want(4)) null_calibration();
        if (want(5)) masking_power();
        if (want(6)) error_control();
        if (want(7)) complementarity();
        if (want(8) || want(9)) downstream();
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed, %.0f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
