#include "disagg/draws.hpp"

#include <fstream>
#include <stdexcept>

#include "disagg/common.hpp"
#include "disagg/csv.hpp"
#include "disagg/diagnostics.hpp"

namespace disagg {

int PosteriorDraws::tract_index(const std::string& tract_id) const {
    for (std::size_t i = 0; i < tract_ids.size(); ++i)
        if (tract_ids[i] == tract_id) return static_cast<int>(i);
    return -1;
}

int PosteriorDraws::cell_col(const std::string& tract_id, int year) const {
    const int ti = tract_index(tract_id);
    if (ti < 0) throw std::invalid_argument("unknown tract " + tract_id);
    if (year < year0 || year >= year0 + T)
        throw std::invalid_argument("year " + std::to_string(year) + " outside the modelled window");
    return ti * T + (year - year0);
}

bool PosteriorDraws::has_cell(const std::string& tract_id, int year) const {
    return tract_index(tract_id) >= 0 && year >= year0 && year < year0 + T;
}

std::vector<double> PosteriorDraws::pi_draws(const std::string& tract_id, int year) const {
    const int c = cell_col(tract_id, year);
    const Eigen::VectorXd col = pi.col(c);
    return {col.data(), col.data() + col.size()};
}

std::vector<double> PosteriorDraws::scalar_draws(const std::string& name) const {
    for (std::size_t j = 0; j < scalar_names.size(); ++j)
        if (scalar_names[j] == name) {
            const Eigen::VectorXd col = scalars.col(static_cast<Eigen::Index>(j));
            return {col.data(), col.data() + col.size()};
        }
    throw std::invalid_argument("unknown scalar parameter " + name);
}

void PosteriorDraws::append(const PosteriorDraws& other) {
    if (other.tract_ids != tract_ids || other.scalar_names != scalar_names ||
        other.year0 != year0 || other.T != T)
        throw std::invalid_argument("append: draw layouts differ");
    const Eigen::Index n0 = pi.rows(), n1 = other.pi.rows();
    pi.conservativeResize(n0 + n1, Eigen::NoChange);
    pi.bottomRows(n1) = other.pi;
    scalars.conservativeResize(n0 + n1, Eigen::NoChange);
    scalars.bottomRows(n1) = other.scalars;
    acc_log.insert(acc_log.end(), other.acc_log.begin(), other.acc_log.end());
}

namespace {

constexpr std::uint64_t kDrawsMagic = 0x44524157534d5458ull;

void put_str(std::ofstream& out, const std::string& s) {
    const std::uint32_t n = static_cast<std::uint32_t>(s.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(s.data(), n);
}

std::string get_str(std::ifstream& in) {
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}

void put_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
    const std::int64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * rows * cols);
}

Eigen::MatrixXd get_matrix(std::ifstream& in) {
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (rows < 0 || cols < 0) throw std::runtime_error("draws file: corrupt matrix header");
    Eigen::MatrixXd m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), sizeof(double) * rows * cols);
    return m;
}

}  // namespace

void save_draws(const std::string& path, const PosteriorDraws& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(&kDrawsMagic), 8);
    out.write(reinterpret_cast<const char*>(&d.seed), 8);
    out.write(reinterpret_cast<const char*>(&d.config_fingerprint), 8);
    const std::int32_t year0 = d.year0, T = d.T;
    out.write(reinterpret_cast<const char*>(&year0), 4);
    out.write(reinterpret_cast<const char*>(&T), 4);
    const std::uint32_t nt = static_cast<std::uint32_t>(d.tract_ids.size());
    out.write(reinterpret_cast<const char*>(&nt), 4);
    for (const auto& t : d.tract_ids) put_str(out, t);
    const std::uint32_t ns = static_cast<std::uint32_t>(d.scalar_names.size());
    out.write(reinterpret_cast<const char*>(&ns), 4);
    for (const auto& s : d.scalar_names) put_str(out, s);
    put_matrix(out, d.pi);
    put_matrix(out, d.scalars);
    const std::uint32_t na = static_cast<std::uint32_t>(d.acc_log.size());
    out.write(reinterpret_cast<const char*>(&na), 4);
    for (const auto& e : d.acc_log) {
        put_str(out, e.param);
        const std::uint8_t b = e.burnin ? 1 : 0;
        out.write(reinterpret_cast<const char*>(&b), 1);
        const std::int64_t batch = e.batch;
        out.write(reinterpret_cast<const char*>(&batch), 8);
        out.write(reinterpret_cast<const char*>(&e.rate), 8);
        out.write(reinterpret_cast<const char*>(&e.scale), 8);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

PosteriorDraws load_draws(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::uint64_t magic = 0;
    in.read(reinterpret_cast<char*>(&magic), 8);
    if (magic != kDrawsMagic) throw std::runtime_error(path + ": not a draws file");
    PosteriorDraws d;
    in.read(reinterpret_cast<char*>(&d.seed), 8);
    in.read(reinterpret_cast<char*>(&d.config_fingerprint), 8);
    std::int32_t year0 = 0, T = 0;
    in.read(reinterpret_cast<char*>(&year0), 4);
    in.read(reinterpret_cast<char*>(&T), 4);
    d.year0 = year0;
    d.T = T;
    std::uint32_t nt = 0;
    in.read(reinterpret_cast<char*>(&nt), 4);
    d.tract_ids.resize(nt);
    for (auto& t : d.tract_ids) t = get_str(in);
    std::uint32_t ns = 0;
    in.read(reinterpret_cast<char*>(&ns), 4);
    d.scalar_names.resize(ns);
    for (auto& s : d.scalar_names) s = get_str(in);
    d.pi = get_matrix(in);
    d.scalars = get_matrix(in);
    std::uint32_t na = 0;
    in.read(reinterpret_cast<char*>(&na), 4);
    d.acc_log.resize(na);
    for (auto& e : d.acc_log) {
        e.param = get_str(in);
        std::uint8_t b = 0;
        in.read(reinterpret_cast<char*>(&b), 1);
        e.burnin = b != 0;
        std::int64_t batch = 0;
        in.read(reinterpret_cast<char*>(&batch), 8);
        e.batch = static_cast<long>(batch);
        in.read(reinterpret_cast<char*>(&e.rate), 8);
        in.read(reinterpret_cast<char*>(&e.scale), 8);
    }
    if (!in) throw std::runtime_error(path + ": truncated draws file");
    return d;
}

void write_summary_csv(const std::string& path, const PosteriorDraws& d) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t j = 0; j < d.scalar_names.size(); ++j) {
        const Eigen::VectorXd col = d.scalars.col(static_cast<Eigen::Index>(j));
        std::vector<double> x(col.data(), col.data() + col.size());
        std::vector<double> sorted(x);
        std::sort(sorted.begin(), sorted.end());
        std::string gz = "nan";
        try {
            gz = fmt_double(geweke_z(x));
        } catch (...) {
            // degenerate chain, leave nan
        }
        rows.push_back({d.scalar_names[j], fmt_double(mean_of(x)), fmt_double(sd_of(x)),
                        fmt_double(quantile_sorted(sorted, 0.025)),
                        fmt_double(quantile_sorted(sorted, 0.25)),
                        fmt_double(quantile_sorted(sorted, 0.50)),
                        fmt_double(quantile_sorted(sorted, 0.75)),
                        fmt_double(quantile_sorted(sorted, 0.975)), fmt_double(chain_ess(x)), gz});
    }
    write_csv(path, {"# config=" + to_hex(d.config_fingerprint) + " seed=" + std::to_string(d.seed)},
              {"param", "mean", "sd", "q025", "q25", "q50", "q75", "q975", "ess", "geweke_z"}, rows);
}

void write_acceptance_log_csv(const std::string& path, const PosteriorDraws& d) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : d.acc_log)
        rows.push_back({e.param, e.burnin ? "burnin" : "sampling", std::to_string(e.batch),
                        fmt_double(e.rate), fmt_double(e.scale)});
    write_csv(path, {"# config=" + to_hex(d.config_fingerprint) + " seed=" + std::to_string(d.seed)},
              {"param", "phase", "batch", "acc_rate", "scale"}, rows);
}

}  // namespace disagg
