#include "chac/output.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace chac {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

std::string format_row(const DiagnosticsRow& r) {
    return std::to_string(r.step) + ',' + g17(r.t) + ',' + g17(r.mass_rho) + ',' + g17(r.energy) + ',' +
           g17(r.dissipation_interval) + ',' + g17(r.energy_identity_residual) + ',' + std::to_string(r.newton_iters) +
           ',' + g17(r.newton_residual);
}

TimeseriesWriter::TimeseriesWriter(const std::filesystem::path& path) : out_(open_out(path)) {
    out_ << kTimeseriesHeader << '\n';
}

void TimeseriesWriter::on_start(const State&, const DiagnosticsRow& row) { out_ << format_row(row) << '\n'; }

void TimeseriesWriter::on_step(const StepRecord& record) {
    out_ << format_row(record.row) << '\n';
    out_.flush();
}

void write_vtk(const std::filesystem::path& path, const FeSpace& space, const State& state) {
    space.check(state.rho);
    space.check(state.eta);
    const PeriodicMesh& mesh = space.mesh();
    const std::size_t ne = space.n_elements();
    std::ofstream out = open_out(path);
    out.precision(17);
    out << "# vtk DataFile Version 3.0\n"
        << "rho eta t=" << g17(state.time) << "\n"
        << "ASCII\n"
        << "DATASET UNSTRUCTURED_GRID\n"
        << "POINTS " << 6 * ne << " double\n";
    for (std::size_t e = 0; e < ne; ++e) {
        Vec2 c[3];
        for (int i = 0; i < 3; ++i) c[i] = mesh.corner(e, i);
        const Vec2 pts[6] = {c[0],
                             c[1],
                             c[2],
                             {0.5 * (c[0][0] + c[1][0]), 0.5 * (c[0][1] + c[1][1])},
                             {0.5 * (c[1][0] + c[2][0]), 0.5 * (c[1][1] + c[2][1])},
                             {0.5 * (c[2][0] + c[0][0]), 0.5 * (c[2][1] + c[0][1])}};
        for (const Vec2& p : pts) out << p[0] << ' ' << p[1] << " 0\n";
    }
    static constexpr int sub[4][3] = {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}};
    out << "CELLS " << 4 * ne << ' ' << 16 * ne << '\n';
    for (std::size_t e = 0; e < ne; ++e) {
        for (const auto& t : sub) {
            out << "3 " << 6 * e + t[0] << ' ' << 6 * e + t[1] << ' ' << 6 * e + t[2] << '\n';
        }
    }
    out << "CELL_TYPES " << 4 * ne << '\n';
    for (std::size_t i = 0; i < 4 * ne; ++i) out << "5\n";
    out << "POINT_DATA " << 6 * ne << '\n';
    for (const auto* name : {"rho", "eta"}) {
        const FieldVec& f = name[0] == 'r' ? state.rho : state.eta;
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t e = 0; e < ne; ++e) {
            for (const std::size_t d : space.element_dofs(e)) out << f[d] << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SnapshotWriter::SnapshotWriter(const FeSpace& space, std::filesystem::path dir, int every)
    : space_(&space), dir_(std::move(dir)), every_(every) {}

void SnapshotWriter::write(const State& s, std::size_t step) const {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%06zu.vtk", step);
    write_vtk(dir_ / name, *space_, s);
}

void SnapshotWriter::on_start(const State& initial, const DiagnosticsRow&) {
    if (every_ > 0) write(initial, 0);
}

void SnapshotWriter::on_step(const StepRecord& record) {
    if (every_ > 0 && record.row.step % static_cast<std::size_t>(every_) == 0) write(record.next, record.row.step);
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceTable& table) {
    std::ofstream out = open_out(path);
    out << kConvergenceHeader << '\n';
    for (const ConvergenceRow& r : table.rows) {
        out << r.k << ',' << g17(r.h) << ',' << g17(r.tau);
        for (int c = 0; c < 4; ++c) {
            out << ',' << g17(r.err[c]) << ',';
            if (r.eoc[c]) out << g17(*r.eoc[c]);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void print_convergence_table(std::ostream& os, const ConvergenceTable& table) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%3s | %10s %6s | %10s %6s | %10s %6s | %10s %6s\n", "k", "err_rho", "eoc",
                  "err_eta", "eoc", "err_mu_rho", "eoc", "err_mu_eta", "eoc");
    os << buf;
    for (const ConvergenceRow& r : table.rows) {
        os << (std::snprintf(buf, sizeof buf, "%3d", r.k), buf);
        for (int c = 0; c < 4; ++c) {
            char eoc_buf[16] = "     -";
            if (r.eoc[c]) std::snprintf(eoc_buf, sizeof eoc_buf, "%6.2f", *r.eoc[c]);
            std::snprintf(buf, sizeof buf, " | %10.2e %6s", r.err[c], eoc_buf);
            os << buf;
        }
        os << '\n';
    }
}

}  // namespace chac
