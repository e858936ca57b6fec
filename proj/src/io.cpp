#include "psboot/io.hpp"

#include "psboot/error.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace psboot::io {

namespace fs = std::filesystem;

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& v)
{
    const char* begin = s.c_str();
    while (*begin == ' ' || *begin == '\t') ++begin;
    if (*begin == '\0') return false;
    char* end = nullptr;
    v = std::strtod(begin, &end);
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row(fields.size());
        bool ok = true;
        for (std::size_t k = 0; k < fields.size() && ok; ++k) ok = parse_double(fields[k], row[k]);
        if (!ok) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": non-numeric field");
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void write_sample_csv(const fs::path& path, const SampleMatrix& x)
{
    std::string s;
    for (std::size_t j = 0; j < x.p(); ++j) {
        if (j) s += ',';
        s += std::to_string(j + 1);
    }
    s += '\n';
    const auto& m = x.rows();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) s += ',';
            s += format_double(m(i, j));
        }
        s += '\n';
    }
    write_text(path, s);
}

SampleMatrix read_sample_csv(const fs::path& path)
{
    auto rows = read_numeric_csv(path);
    if (!rows.empty()) {
        const auto& head = rows.front();
        bool indices = true;
        for (std::size_t j = 0; j < head.size() && indices; ++j) indices = head[j] == static_cast<double>(j + 1);
        if (indices) rows.erase(rows.begin());  // header of column indices
    }
    if (rows.empty()) throw ValidationError(path.string() + ": no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return SampleMatrix(std::move(m));
}

std::vector<double> read_vector_csv(const fs::path& path)
{
    const auto rows = read_numeric_csv(path);
    std::vector<double> out;
    for (const auto& r : rows) {
        if (rows.size() == 1) return r;  // a single row
        out.push_back(r.back());         // one value per line, optionally "j,value"
    }
    return out;
}

std::string draws_csv(const BootstrapDraws& d)
{
    std::string s = "b,L_star,M_star\n";
    for (std::size_t b = 0; b < d.B; ++b)
        s += std::to_string(b + 1) + ',' + format_double(d.lows[b]) + ',' + format_double(d.highs[b]) + '\n';
    return s;
}

Json draws_sidecar(const BootstrapDraws& d)
{
    return Json{{"B", d.B}, {"tau", d.tau}, {"seed", d.seed}};
}

std::string sci_csv(const SciSet& s)
{
    std::string out = "j,lo,hi,sigma_hat,width\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        out += std::to_string(s.coords[k] + 1) + ',' + format_double(s.lo[k]) + ',' + format_double(s.hi[k]) + ',' +
               format_double(s.sigma_hat[k]) + ',' + format_double(s.width(k)) + '\n';
    }
    return out;
}

Json sci_json(const SciSet& s)
{
    return Json{{"tau", s.tau},       {"rho", s.rho},
                {"B", s.B},           {"seed", s.seed},
                {"n", s.n},           {"size", s.size()},
                {"q_lo", s.q_lo},     {"q_hi", s.q_hi},
                {"mean_width", s.size() ? s.mean_width() : 0.0},
                {"few_draws", s.few_draws}, {"degenerate", s.degenerate}};
}

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T get_required(const Json& j, const char* key)
{
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    return get_or<T>(j, key, T{});
}

}  // namespace

CorrelationSpec correlation_from_json(const Json& j)
{
    if (j.is_string()) return correlation_from_json(Json{{"kind", j}});
    if (!j.is_object()) throw ValidationError("corr must be an object");
    const auto kind = get_required<std::string>(j, "kind");
    if (kind == "identity") return corr::Identity{};
    if (kind == "autoregressive" || kind == "ar") return corr::Autoregressive{get_required<double>(j, "rho0")};
    if (kind == "algebraic") return corr::Algebraic{get_required<double>(j, "gamma")};
    if (kind == "banded") return corr::Banded{get_required<double>(j, "c0")};
    if (kind == "multinomial") return corr::Multinomial{get_required<std::vector<double>>(j, "pi")};
    if (kind == "explicit") {
        const auto rows = get_required<std::vector<std::vector<double>>>(j, "matrix");
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != rows.size()) throw ValidationError("explicit correlation must be square");
            for (std::size_t c = 0; c < rows.size(); ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        return corr::Explicit{std::move(m)};
    }
    throw ValidationError("unknown correlation kind '" + kind + "'");
}

Json correlation_to_json(const CorrelationSpec& spec)
{
    Json j{{"kind", kind_name(spec)}};
    if (const auto* a = std::get_if<corr::Autoregressive>(&spec)) j["rho0"] = a->rho0;
    if (const auto* a = std::get_if<corr::Algebraic>(&spec)) j["gamma"] = a->gamma;
    if (const auto* b = std::get_if<corr::Banded>(&spec)) j["c0"] = b->c0;
    if (const auto* m = std::get_if<corr::Multinomial>(&spec)) j["pi"] = m->pi;
    if (const auto* e = std::get_if<corr::Explicit>(&spec)) {
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < e->matrix.rows(); ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < e->matrix.cols(); ++c) row.push_back(e->matrix(r, c));
            rows.push_back(std::move(row));
        }
        j["matrix"] = std::move(rows);
    }
    return j;
}

CovarianceModel model_from_json(const Json& j)
{
    if (!j.is_object()) throw ValidationError("model must be an object");
    if (!j.contains("sigma")) throw ValidationError("model: missing field 'sigma'");
    const Json& s = j.at("sigma");
    Eigen::VectorXd sigma;
    if (s.is_array()) {
        const auto v = s.get<std::vector<double>>();
        sigma = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        if (j.contains("p") && get_required<std::size_t>(j, "p") != v.size())
            throw ValidationError("model: p does not match sigma length");
    } else if (s.is_object()) {
        const auto kind = get_or<std::string>(s, "kind", "power");
        if (kind != "power") throw ValidationError("unknown sigma kind '" + kind + "'");
        sigma = power_sigma(get_required<std::size_t>(j, "p"), get_or<double>(s, "c", 1.0), get_required<double>(s, "alpha"));
    } else {
        throw ValidationError("model: sigma must be an array or an object");
    }
    return CovarianceModel(std::move(sigma), correlation_from_json(j.contains("corr") ? j.at("corr") : Json("identity")));
}

Json model_to_json(const CovarianceModel& m)
{
    return Json{{"p", m.p()},
                {"sigma", std::vector<double>(m.sigma().data(), m.sigma().data() + m.sigma().size())},
                {"corr", correlation_to_json(m.correlation_spec())}};
}

multinomial::MultinomialModel multinomial_model_from_json(const Json& j, const fs::path& base)
{
    if (!j.is_object()) throw ValidationError("multinomial model must be an object");
    if (j.contains("pi")) return multinomial::MultinomialModel(get_required<std::vector<double>>(j, "pi"));
    if (j.contains("pi_csv")) {
        fs::path p = get_required<std::string>(j, "pi_csv");
        if (p.is_relative()) p = base / p;
        return multinomial::MultinomialModel(read_vector_csv(p));
    }
    const auto kind = get_or<std::string>(j, "kind", "zipf");
    if (kind != "zipf") throw ValidationError("unknown multinomial model kind '" + kind + "'");
    return multinomial::zipf_model(get_required<std::size_t>(j, "p"), get_or<double>(j, "eta", 1.0));
}

Json diagnostics_json(const DecayDiagnostics& d)
{
    return Json{{"alpha_hat", d.alpha_hat},
                {"alpha_degenerate", d.alpha_degenerate},
                {"effective_rank", d.effective_rank},
                {"ell_n", d.ell_n},
                {"k_n", d.k_n},
                {"ell_used", d.ell_used},
                {"max_offdiag", d.corr_checks.max_offdiag},
                {"positive_offdiag_sum", d.corr_checks.positive_offdiag_sum},
                {"r_plus_psd", d.corr_checks.r_plus_psd},
                {"sorted_sigma",
                 std::vector<double>(d.sorted_sigma.data(), d.sorted_sigma.data() + d.sorted_sigma.size())}};
}

namespace {

template <class Map>
Json histogram_json(const Map& m)
{
    Json out = Json::array();
    for (const auto& [k, v] : m) out.push_back(Json{{"value", k}, {"count", v}});
    return out;
}

}  // namespace

Json fda_report_json(const fda::FdaReport& r)
{
    return Json{{"rejection_rate", r.rejection_rate},
                {"standard_error", r.standard_error},
                {"n_sims", r.sims.size()},
                {"under_resolved", r.under_resolved},
                {"selected_tau_histogram", histogram_json(r.selected_tau_histogram)}};
}

std::string fda_sims_csv(const fda::FdaReport& r)
{
    std::string s = "sim_id,selected_tau,rejected,max_offending_j\n";
    for (const auto& rec : r.sims)
        s += std::to_string(rec.sim_id + 1) + ',' + format_double(rec.selected_tau) + ',' + (rec.rejected ? "1" : "0") +
             ',' + std::to_string(rec.max_offending_j) + '\n';
    return s;
}

Json multinomial_report_json(const multinomial::ExperimentReport& r)
{
    return Json{{"coverage", r.coverage},
                {"standard_error", r.standard_error},
                {"mean_cell_coverage", r.mean_cell_coverage},
                {"mean_selected_cells", r.mean_selected_cells},
                {"n_sims", r.sims.size()},
                {"selected_tau_histogram", histogram_json(r.selected_tau_histogram)},
                {"selected_cells_histogram", histogram_json(r.selected_cells_histogram)}};
}

std::string multinomial_sims_csv(const multinomial::ExperimentReport& r)
{
    std::string s = "sim_id,covered,J_size,selected_tau,cell_coverage\n";
    for (const auto& rec : r.sims)
        s += std::to_string(rec.sim_id + 1) + ',' + (rec.covered ? "1" : "0") + ',' +
             std::to_string(rec.selected_cells) + ',' + format_double(rec.selected_tau) + ',' +
             format_double(rec.cell_coverage) + '\n';
    return s;
}

std::string rate_csv(const ratelab::RateStudyResult& r)
{
    std::string s = "n,p,dk_gauss,dk_boot_median,dk_boot_q90,noise_scale\n";
    for (const auto& pt : r.per_n)
        s += std::to_string(pt.n) + ',' + std::to_string(pt.p) + ',' + format_double(pt.dk_gauss) + ',' +
             format_double(pt.dk_boot_median) + ',' + format_double(pt.dk_boot_q90) + ',' +
             format_double(pt.noise_scale) + '\n';
    return s;
}

Json rate_json(const ratelab::RateStudyResult& r)
{
    Json pts = Json::array();
    for (const auto& pt : r.per_n)
        pts.push_back(Json{{"n", pt.n},
                           {"p", pt.p},
                           {"dk_gauss", pt.dk_gauss},
                           {"dk_boot_median", pt.dk_boot_median},
                           {"dk_boot_q90", pt.dk_boot_q90},
                           {"noise_scale", pt.noise_scale}});
    return Json{{"slope", r.fit.slope},
                {"intercept", r.fit.intercept},
                {"r2", r.fit.r2},
                {"floored", r.fit.floored},
                {"floor", r.floor},
                {"per_n", std::move(pts)}};
}

}  // namespace psboot::io
