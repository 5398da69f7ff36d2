#include "tfch/kernels.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "tfch/special.hpp"

namespace tfch {

namespace {

void check_args(const TimeMesh& mesh, double alpha, int n) {
    if (!(alpha >= kAlphaMin && alpha <= kAlphaMax))
        throw std::invalid_argument("kernel row: alpha outside [1e-3, 1-1e-10]");
    if (n < 1 || n > mesh.size())
        throw std::invalid_argument("kernel row: n outside the mesh range");
}

KernelRow l1_row_impl(const TimeMesh& mesh, double alpha, int n, bool parallel) {
    check_args(mesh, alpha, n);
    KernelRow row{n, Family::L1, std::vector<double>(static_cast<size_t>(n))};
    const double b = 2.0 - alpha;
    const double tn = mesh.t(n);
#pragma omp parallel for schedule(static) if (parallel && n >= 512)
    for (int k = 1; k <= n; ++k)
        row.weights[static_cast<size_t>(n - k)] = omega_dq(b, tn - mesh.t(k), mesh.tau(k));
    return row;
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::L1: return "l1";
        case Family::L1h: return "l1h";
        case Family::L1a: return "l1a";
        case Family::AuxL1h: return "auxl1h";
        case Family::AuxL1a: return "auxl1a";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "l1") return Family::L1;
    if (name == "l1h") return Family::L1h;
    if (name == "l1a") return Family::L1a;
    if (name == "auxl1h") return Family::AuxL1h;
    if (name == "auxl1a") return Family::AuxL1a;
    throw std::invalid_argument("unknown kernel family: " + name);
}

KernelRow l1_row(const TimeMesh& mesh, double alpha, int n) {
    return l1_row_impl(mesh, alpha, n, true);
}

KernelRow ref::l1_row(const TimeMesh& mesh, double alpha, int n) {
    return l1_row_impl(mesh, alpha, n, false);
}

KernelRow l1h_row(const TimeMesh& mesh, double alpha, int n) {
    check_args(mesh, alpha, n);
    KernelRow row{n, Family::L1h, std::vector<double>(static_cast<size_t>(n))};
    const double b = 2.0 - alpha;
    const double th = 0.5 * (mesh.t(n) + mesh.t(n - 1));
    // Lag 0 integrates only up to the half point but still divides by the full
    // tau_n, hence the extra 1/2 against the half-length difference quotient.
    row.weights[0] = 0.5 * omega_dq(b, 0.0, th - mesh.t(n - 1));
#pragma omp parallel for schedule(static) if (n >= 512)
    for (int k = 1; k <= n - 1; ++k)
        row.weights[static_cast<size_t>(n - k)] = omega_dq(b, th - mesh.t(k), mesh.tau(k));
    return row;
}

KernelRow l1a_row(const TimeMesh& mesh, double alpha, int n) {
    check_args(mesh, alpha, n);
    const KernelRow cur = l1_row(mesh, alpha, n);
    KernelRow row{n, Family::L1a, std::vector<double>(static_cast<size_t>(n))};
    row.weights[0] = 0.5 * cur.weights[0];
    if (n >= 2) {
        const KernelRow prev = l1_row(mesh, alpha, n - 1);
        for (int j = 1; j < n; ++j)
            row.weights[static_cast<size_t>(j)] =
                0.5 * (cur.weights[static_cast<size_t>(j)] +
                       prev.weights[static_cast<size_t>(j - 1)]);
    }
    return row;
}

KernelRow auxiliary_row(const KernelRow& row) {
    Family out;
    switch (row.family) {
        case Family::L1h: out = Family::AuxL1h; break;
        case Family::L1a: out = Family::AuxL1a; break;
        default:
            throw std::invalid_argument("auxiliary_row: defined for the half-point families only");
    }
    KernelRow aux{row.n, out, row.weights};
    aux.weights[0] *= 2.0;
    return aux;
}

KernelTable::KernelTable(const TimeMesh& mesh, double alpha, Family family)
    : mesh_(&mesh), alpha_(alpha), family_(family) {
    if (!(alpha >= kAlphaMin && alpha <= kAlphaMax))
        throw std::invalid_argument("KernelTable: alpha outside [1e-3, 1-1e-10]");
}

void KernelTable::extend(int n) {
    if (n > mesh_->size())
        throw std::invalid_argument("KernelTable::extend: n beyond the mesh");
    for (int m = filled() + 1; m <= n; ++m) {
        switch (family_) {
            case Family::L1: rows_.push_back(l1_row(*mesh_, alpha_, m)); break;
            case Family::L1h: rows_.push_back(l1h_row(*mesh_, alpha_, m)); break;
            case Family::L1a: rows_.push_back(l1a_row(*mesh_, alpha_, m)); break;
            case Family::AuxL1h: rows_.push_back(auxiliary_row(l1h_row(*mesh_, alpha_, m))); break;
            case Family::AuxL1a: rows_.push_back(auxiliary_row(l1a_row(*mesh_, alpha_, m))); break;
        }
    }
}

const KernelRow& KernelTable::row(int n) const {
    if (n < 1 || n > filled())
        throw std::out_of_range("KernelTable::row: row not filled");
    return rows_[static_cast<size_t>(n - 1)];
}

namespace {

std::vector<double> doc_row_impl(const KernelTable& table, int n, bool parallel) {
    if (n < 1 || n > table.filled())
        throw std::invalid_argument("doc_row: kernel rows 1..n must be filled");
    std::vector<double> theta(static_cast<size_t>(n));
    for (int k = 1; k <= n; ++k)
        if (!(table.a0(k) > 0.0))
            throw std::runtime_error("doc_row: nonpositive lag-0 kernel, triangle is singular");
    theta[0] = 1.0 / table.a0(n);
    for (int k = n - 1; k >= 1; --k) {
        double s = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : s) if (parallel && n - k >= 512)
        for (int j = k + 1; j <= n; ++j)
            s += theta[static_cast<size_t>(n - j)] * table.row(j).a(j - k);
        theta[static_cast<size_t>(n - k)] = -s / table.a0(k);
    }
    return theta;
}

}  // namespace

std::vector<double> doc_row(const KernelTable& table, int n) {
    return doc_row_impl(table, n, true);
}

std::vector<double> doc_row(const std::vector<KernelRow>& rows, int n) {
    if (n < 1 || n > static_cast<int>(rows.size()))
        throw std::invalid_argument("doc_row: kernel rows 1..n must be filled");
    std::vector<double> theta(static_cast<size_t>(n));
    for (int k = 1; k <= n; ++k)
        if (!(rows[static_cast<size_t>(k - 1)].a(0) > 0.0))
            throw std::runtime_error("doc_row: nonpositive lag-0 kernel, triangle is singular");
    theta[0] = 1.0 / rows[static_cast<size_t>(n - 1)].a(0);
    for (int k = n - 1; k >= 1; --k) {
        double s = 0.0;
        for (int j = k + 1; j <= n; ++j)
            s += theta[static_cast<size_t>(n - j)] * rows[static_cast<size_t>(j - 1)].a(j - k);
        theta[static_cast<size_t>(n - k)] = -s / rows[static_cast<size_t>(k - 1)].a(0);
    }
    return theta;
}

std::vector<double> ref::doc_row(const KernelTable& table, int n) {
    return doc_row_impl(table, n, false);
}

std::vector<double> dcc_next(const std::vector<double>& p_prev,
                             const std::vector<double>& theta_row) {
    if (theta_row.size() != p_prev.size() + 1)
        throw std::invalid_argument("dcc_next: row sizes must differ by one");
    std::vector<double> p(theta_row.size());
    p[0] = theta_row[0];
    for (size_t j = 1; j < p.size(); ++j) p[j] = theta_row[j] + p_prev[j - 1];
    return p;
}

CompanionKernels companion_kernels(const KernelTable& table, int n) {
    CompanionKernels c;
    c.doc.reserve(static_cast<size_t>(n));
    c.dcc.reserve(static_cast<size_t>(n));
    std::vector<double> p_prev;
    for (int m = 1; m <= n; ++m) {
        c.doc.push_back(doc_row(table, m));
        p_prev = dcc_next(p_prev, c.doc.back());
        c.dcc.push_back(p_prev);
    }
    return c;
}

bool CriteriaReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const CriterionCheck* CriteriaReport::first_violation() const {
    const CriterionCheck* best = nullptr;
    for (const auto& c : checks) {
        if (c.pass) continue;
        if (!best || c.n < best->n || (c.n == best->n && c.j < best->j)) best = &c;
    }
    return best;
}

namespace {

// Records the first site where the strict comparison lhs > rhs fails.
struct StrictCheck {
    CriterionCheck out;
    explicit StrictCheck(std::string name) { out.condition = std::move(name); }
    void require(double lhs, double rhs, int n, int j) {
        if (lhs > rhs || !out.pass) return;
        out.pass = false;
        out.tie = (lhs == rhs);
        out.n = n;
        out.j = j;
    }
};

}  // namespace

CriteriaReport check_criteria_rows(const std::vector<KernelRow>& rows,
                                   CriteriaVariant variant) {
    if (rows.empty()) throw std::invalid_argument("check_criteria: no rows");
    CriteriaReport report;
    report.family = rows.front().family;
    report.variant = variant;
    const int n = static_cast<int>(rows.size());
    const auto& row = [&](int m) -> const KernelRow& { return rows[static_cast<size_t>(m - 1)]; };

    if (variant == CriteriaVariant::Uniform) {
        // Time-invariant kernels: the conditions read off the last row alone.
        const KernelRow& r = row(n);
        StrictCheck nonneg("nonnegative"), dec("decreasing"), convex("convex");
        for (int j = 0; j < n; ++j) nonneg.require(r.a(j), 0.0, n, j);
        for (int j = 1; j < n; ++j) dec.require(r.a(j - 1), r.a(j), n, j);
        for (int j = 1; j + 1 < n; ++j)
            convex.require(r.a(j - 1) - r.a(j), r.a(j) - r.a(j + 1), n, j);
        report.checks = {nonneg.out, dec.out, convex.out};
        return report;
    }

    StrictCheck mono("row-decreasing-positive"), cross("cross-row-decreasing"),
        logc("log-convex");
    for (int m = 1; m <= n; ++m) {
        const KernelRow& r = row(m);
        mono.require(r.a(0), 0.0, m, 0);
        for (int j = 1; j < m; ++j) {
            mono.require(r.a(j), 0.0, m, j);
            mono.require(r.a(j - 1), r.a(j), m, j);
        }
    }
    for (int m = 2; m <= n; ++m) {
        const KernelRow& r = row(m);
        const KernelRow& rp = row(m - 1);
        for (int j = 1; j < m; ++j) cross.require(rp.a(j - 1), r.a(j), m, j);
        for (int j = 1; j + 1 < m; ++j)
            logc.require(rp.a(j - 1) * r.a(j + 1), rp.a(j) * r.a(j), m, j);
    }
    report.checks = {mono.out, cross.out, logc.out};
    return report;
}

CriteriaReport check_criteria(const KernelTable& table, int n, CriteriaVariant variant) {
    if (n < 1 || n > table.filled())
        throw std::invalid_argument("check_criteria: rows 1..n must be filled");
    std::vector<KernelRow> rows;
    rows.reserve(static_cast<size_t>(n));
    for (int m = 1; m <= n; ++m) rows.push_back(table.row(m));
    return check_criteria_rows(rows, variant);
}

void write_rows_csv(const KernelTable& table, int n, std::ostream& os) {
    os << "n,j,a_j\n";
    os.precision(17);
    for (int m = 1; m <= n; ++m)
        for (int j = 0; j < m; ++j)
            os << m << ',' << j << ',' << table.row(m).a(j) << '\n';
}

void write_report_json(const CriteriaReport& report, std::ostream& os) {
    nlohmann::json j;
    j["family"] = family_name(report.family);
    j["variant"] = report.variant == CriteriaVariant::Uniform ? "uniform" : "nonuniform";
    j["passes"] = nlohmann::json::array();
    for (const auto& c : report.checks)
        j["passes"].push_back({{"condition", c.condition}, {"pass", c.pass}, {"tie", c.tie}});
    if (const CriterionCheck* v = report.first_violation())
        j["first_violation"] = {{"n", v->n}, {"j", v->j}, {"condition", v->condition}};
    else
        j["first_violation"] = nullptr;
    os << j.dump(2) << '\n';
}

}
