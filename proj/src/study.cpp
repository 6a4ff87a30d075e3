#include "chac/study.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include "chac/errors.hpp"

namespace chac {

namespace fs = std::filesystem;

namespace {

fs::path make_scratch_dir(const fs::path& root) {
    static std::atomic<unsigned> counter{0};
    const fs::path base = root.empty() ? fs::temp_directory_path() : root;
    std::random_device rd;
    for (int attempt = 0; attempt < 100; ++attempt) {
        const fs::path dir = base / ("chac-traj-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::error_code ec;
        if (fs::create_directories(dir, ec)) {
            return dir;
        }
    }
    throw std::runtime_error("TrajectoryStore: could not create scratch directory under " + base.string());
}

}  // namespace

TrajectoryStore::TrajectoryStore(const FeSpace& space, const TimeGrid& grid, const fs::path& scratch_root)
    : space_(&space), grid_(grid), dir_(make_scratch_dir(scratch_root)) {
    const auto mode = std::ios::in | std::ios::out | std::ios::trunc | std::ios::binary;
    nodes_.open(dir_ / "nodes.bin", mode);
    pots_.open(dir_ / "potentials.bin", mode);
    if (!nodes_ || !pots_) {
        throw std::runtime_error("TrajectoryStore: cannot open scratch files in " + dir_.string());
    }
}

TrajectoryStore::~TrajectoryStore() {
    nodes_.close();
    pots_.close();
    std::error_code ec;
    fs::remove_all(dir_, ec);
}

void TrajectoryStore::on_start(const State& initial, const DiagnosticsRow&) { push_node(initial.rho, initial.eta); }

void TrajectoryStore::on_step(const StepRecord& record) {
    push_node(record.next.rho, record.next.eta);
    push_potentials(record.pots.mu_rho, record.pots.mu_eta);
}

void TrajectoryStore::write_pair(std::fstream& file, const FieldVec& a, const FieldVec& b) {
    space_->check(a);
    space_->check(b);
    file.seekp(0, std::ios::end);
    const auto bytes = static_cast<std::streamsize>(a.size() * sizeof(double));
    file.write(reinterpret_cast<const char*>(a.coeffs.data()), bytes);
    file.write(reinterpret_cast<const char*>(b.coeffs.data()), bytes);
    if (!file) {
        throw std::runtime_error("TrajectoryStore: write failed in " + dir_.string());
    }
}

void TrajectoryStore::read_pair(std::fstream& file, std::size_t frame, FieldVec& a, FieldVec& b) const {
    const std::size_t nd = space_->n_dofs();
    a = space_->zeros();
    b = space_->zeros();
    const auto bytes = static_cast<std::streamsize>(nd * sizeof(double));
    file.flush();
    file.seekg(static_cast<std::streamoff>(frame) * 2 * bytes, std::ios::beg);
    file.read(reinterpret_cast<char*>(a.coeffs.data()), bytes);
    file.read(reinterpret_cast<char*>(b.coeffs.data()), bytes);
    if (!file) {
        throw std::runtime_error("TrajectoryStore: read failed in " + dir_.string());
    }
}

void TrajectoryStore::push_node(const FieldVec& rho, const FieldVec& eta) {
    if (n_nodes_ > grid_.N) {
        throw InvalidParameter("TrajectoryStore: more nodes than the time grid holds");
    }
    write_pair(nodes_, rho, eta);
    ++n_nodes_;
}

void TrajectoryStore::push_potentials(const FieldVec& mu_rho, const FieldVec& mu_eta) {
    if (n_intervals_ >= grid_.N) {
        throw InvalidParameter("TrajectoryStore: more intervals than the time grid holds");
    }
    write_pair(pots_, mu_rho, mu_eta);
    ++n_intervals_;
}

State TrajectoryStore::node(std::size_t n) const {
    if (n >= n_nodes_) {
        throw IndexOutOfRange("TrajectoryStore: node " + std::to_string(n) + " not stored");
    }
    State s;
    read_pair(nodes_, n, s.rho, s.eta);
    s.time = grid_.time(n);
    return s;
}

IntervalPotentials TrajectoryStore::potentials(std::size_t n) const {
    if (n == 0 || n > n_intervals_) {
        throw IndexOutOfRange("TrajectoryStore: interval " + std::to_string(n) + " not stored");
    }
    IntervalPotentials p;
    read_pair(pots_, n - 1, p.mu_rho, p.mu_eta);
    return p;
}

double inter_grid_error(const TrajectoryStore& fine, const TrajectoryStore& coarse, ErrorKind which) {
    const int space_offset = fine.space().mesh().refinement_offset(coarse.space().mesh());
    if (space_offset != 0 && space_offset != 1) {
        throw LineageMismatch("inter_grid_error: meshes are not equal or consecutive refinements");
    }
    const std::size_t ratio = space_offset == 0 ? 1 : 2;
    if (fine.grid().N != ratio * coarse.grid().N ||
        std::abs(fine.grid().T - coarse.grid().T) > 1e-14 * std::abs(fine.grid().T)) {
        throw LineageMismatch("inter_grid_error: time grids do not match the spatial refinement");
    }
    if (!fine.complete() || !coarse.complete()) {
        throw LineageMismatch("inter_grid_error: trajectory is incomplete");
    }
    const FeSpace& fs_ = fine.space();
    const FeSpace& cs = coarse.space();
    const SparseMat prolongation = prolongation_matrix(cs, fs_);
    auto lift = [&](const std::vector<double>& c) { return fs_.wrap(matvec(prolongation, c)); };
    auto diff = [&](const FieldVec& f, const FieldVec& c_lifted) {
        std::vector<double> d(f.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = f.coeffs[i] - c_lifted.coeffs[i];
        return fs_.wrap(std::move(d));
    };

    const std::size_t nf = fine.grid().N;
    if (which == ErrorKind::RhoLinfH1 || which == ErrorKind::EtaLinfH1) {
        const bool rho = which == ErrorKind::RhoLinfH1;
        double worst = 0.0;
        for (std::size_t m = 0; m <= nf; ++m) {
            std::vector<double> c;
            if (m % ratio == 0) {
                const State s = coarse.node(m / ratio);
                c = (rho ? s.rho : s.eta).coeffs;
            } else {
                const State a = coarse.node(m / ratio);
                const State b = coarse.node(m / ratio + 1);
                const auto& va = (rho ? a.rho : a.eta).coeffs;
                const auto& vb = (rho ? b.rho : b.eta).coeffs;
                c.resize(va.size());
                for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (va[i] + vb[i]);
            }
            const State f = fine.node(m);
            const double e = norm(fs_, diff(rho ? f.rho : f.eta, lift(c)), NormKind::H1);
            worst = std::max(worst, e);
        }
        return worst;
    }

    const bool mu_rho = which == ErrorKind::MuRhoL2H1;
    const NormKind kind = mu_rho ? NormKind::H1 : NormKind::L2;
    const double tau_f = fine.grid().tau();
    double sum = 0.0;
    std::size_t cached = 0;
    FieldVec lifted;
    for (std::size_t m = 1; m <= nf; ++m) {
        const std::size_t cm = (m + ratio - 1) / ratio;
        if (cm != cached) {
            const IntervalPotentials cp = coarse.potentials(cm);
            lifted = lift((mu_rho ? cp.mu_rho : cp.mu_eta).coeffs);
            cached = cm;
        }
        const IntervalPotentials fp = fine.potentials(m);
        const double e = norm(fs_, diff(mu_rho ? fp.mu_rho : fp.mu_eta, lifted), kind);
        sum += tau_f * e * e;
    }
    return std::sqrt(sum);
}

double eoc(double err_coarse, double err_fine) {
    if (!(err_coarse > 0.0) || !(err_fine > 0.0)) {
        throw InvalidParameter("eoc: errors must be positive");
    }
    return std::log2(err_coarse / err_fine);
}

std::size_t steps_for_level(double T, double tau_factor, int k) {
    if (!(T > 0.0) || !(tau_factor > 0.0) || k < 1) {
        throw InvalidParameter("steps_for_level: need T > 0, tau_factor > 0, k >= 1");
    }
    const double tau = tau_factor * std::ldexp(1.0, -k);
    const double steps = T / tau;
    const double rounded = std::round(steps);
    if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * steps) {
        throw InvalidParameter("T = " + std::to_string(T) + " is not an integer multiple of tau = " +
                               std::to_string(tau) + " at level k = " + std::to_string(k));
    }
    return static_cast<std::size_t>(rounded);
}

ConvergenceTable run_ladder(const LadderConfig& config, int k_min, int k_max) {
    if (k_min < 1 || k_max < k_min) {
        throw InvalidParameter("run_ladder: need 1 <= k_min <= k_max");
    }
    validate(config.params);
    const std::size_t levels = static_cast<std::size_t>(k_max - k_min + 1);

    std::vector<std::unique_ptr<FeSpace>> spaces;
    std::vector<std::unique_ptr<TrajectoryStore>> stores;
    PeriodicMesh mesh = build_periodic_mesh(std::size_t{1} << k_min);
    for (std::size_t l = 0; l < levels; ++l) {
        if (l > 0) mesh = refine_uniform(mesh);
        const int k = k_min + static_cast<int>(l);
        spaces.push_back(std::make_unique<FeSpace>(build_space(mesh, config.quad_degree)));
        const TimeGrid grid{config.T, steps_for_level(config.T, config.tau_factor, k)};
        stores.push_back(std::make_unique<TrajectoryStore>(*spaces.back(), grid, config.scratch_dir));
    }

    std::mutex progress_mutex;
    struct ProgressObserver : RunObserver {
        int k = 0;
        std::size_t N = 0;
        const LadderConfig* cfg = nullptr;
        std::mutex* mutex = nullptr;
        void on_step(const StepRecord& r) override {
            if (!cfg->progress) return;
            const std::lock_guard<std::mutex> lock(*mutex);
            cfg->progress(k, r.row.step, N);
        }
    };

    std::vector<std::exception_ptr> failures(levels);
    auto run_level = [&](std::size_t l) {
        const int k = k_min + static_cast<int>(l);
        try {
            ProgressObserver po;
            po.k = k;
            po.N = stores[l]->grid().N;
            po.cfg = &config;
            po.mutex = &progress_mutex;
            RunObserver* observers[] = {stores[l].get(), &po};
            run(*spaces[l], config.params, stores[l]->grid(), config.initial, observers, config.run);
        } catch (const std::exception& ex) {
            failures[l] = std::make_exception_ptr(StepFailure(static_cast<std::size_t>(k),
                                                              "level k=" + std::to_string(k) + ": " + ex.what()));
        }
    };

    const std::size_t jobs = static_cast<std::size_t>(std::max(1, config.jobs));
    if (jobs == 1) {
        for (std::size_t l = 0; l < levels; ++l) run_level(l);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        // largest levels first so the longest job starts immediately
        for (std::size_t t = 0; t < std::min(jobs, levels); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < levels; i = next++) run_level(levels - 1 - i);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    ConvergenceTable table;
    for (std::size_t l = 0; l + 1 < levels; ++l) {
        ConvergenceRow row;
        row.k = k_min + static_cast<int>(l);
        row.h = std::ldexp(1.0, -row.k);
        row.tau = stores[l]->grid().tau();
        const ErrorKind kinds[4] = {ErrorKind::RhoLinfH1, ErrorKind::EtaLinfH1, ErrorKind::MuRhoL2H1,
                                    ErrorKind::MuEtaL2L2};
        for (int c = 0; c < 4; ++c) {
            row.err[c] = inter_grid_error(*stores[l + 1], *stores[l], kinds[c]);
            if (!table.rows.empty()) {
                const double prev = table.rows.back().err[c];
                if (prev > 0.0 && row.err[c] > 0.0) row.eoc[c] = eoc(prev, row.err[c]);
            }
        }
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace chac
