#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tfch/mesh.hpp"

namespace tfch {

enum class Family { L1, L1h, L1a, AuxL1h, AuxL1a };
const char* family_name(Family f);
Family family_from_name(const std::string& name);

// Fractional order domain accepted by every kernel builder.  The alpha -> 1
// limits are exercised at 1 - 1e-8 rather than through a separate code path.
inline constexpr double kAlphaMin = 1e-3;
inline constexpr double kAlphaMax = 1.0 - 1e-10;

// One convolution row: weights[j] multiplies the increment at step k = n - j.
struct KernelRow {
    int n = 0;
    Family family = Family::L1;
    std::vector<double> weights;  // size n, lag-indexed

    double a(int j) const { return weights[static_cast<size_t>(j)]; }
};

KernelRow l1_row(const TimeMesh& mesh, double alpha, int n);
KernelRow l1h_row(const TimeMesh& mesh, double alpha, int n);
// Average of the L1 values at t_n and t_{n-1}; lag-0 weight is half the L1 one.
KernelRow l1a_row(const TimeMesh& mesh, double alpha, int n);
// Doubles the lag-0 weight; defined for the half-point families only.
KernelRow auxiliary_row(const KernelRow& row);

// Triangular cache of rows 1..n for one (mesh, alpha, family).  Holds a
// reference to the mesh, so an adaptively growing mesh extends the table too;
// already computed rows depend only on the mesh prefix and stay valid.
class KernelTable {
public:
    KernelTable(const TimeMesh& mesh, double alpha, Family family);
    // The table keeps a pointer to the mesh; a temporary would dangle.
    KernelTable(TimeMesh&&, double, Family) = delete;

    void extend(int n);                // fills rows up to n
    const KernelRow& row(int n) const; // requires extend(n) to have happened
    double a0(int n) const { return row(n).weights[0]; }
    int filled() const { return static_cast<int>(rows_.size()); }

    const TimeMesh& mesh() const { return *mesh_; }
    double alpha() const { return alpha_; }
    Family family() const { return family_; }

private:
    const TimeMesh* mesh_;
    double alpha_;
    Family family_;
    std::vector<KernelRow> rows_;
};

// theta row n of the orthogonal companions: backward substitution against the
// kernel triangle, theta_0^{(n)} = 1/a_0^{(n)},
// theta_{n-k}^{(n)} = -(1/a_0^{(k)}) sum_{j>k} theta_{n-j}^{(n)} a_{j-k}^{(j)}.
std::vector<double> doc_row(const KernelTable& table, int n);
// Same recursion over free-standing rows (rows[m-1] is row m).
std::vector<double> doc_row(const std::vector<KernelRow>& rows, int n);

struct CompanionKernels {
    // doc[m-1] = theta row m, dcc[m-1] = p row m; all lag-indexed.
    std::vector<std::vector<double>> doc;
    std::vector<std::vector<double>> dcc;
};

// Companion set for rows 1..n.  p rows accumulate incrementally:
// p_0^{(m)} = theta_0^{(m)}, p_j^{(m)} = theta_j^{(m)} + p_{j-1}^{(m-1)}.
CompanionKernels companion_kernels(const KernelTable& table, int n);

// One p row advanced from the previous one; p_prev is row n-1 (empty for n = 1).
std::vector<double> dcc_next(const std::vector<double>& p_prev,
                             const std::vector<double>& theta_row);

namespace ref {
// Serial twins used by the benchmark and the parallel-consistency tests.
KernelRow l1_row(const TimeMesh& mesh, double alpha, int n);
std::vector<double> doc_row(const KernelTable& table, int n);
}

enum class CriteriaVariant { Uniform, Nonuniform };

struct CriterionCheck {
    std::string condition;
    bool pass = true;
    bool tie = false;   // equality at the first violating site
    int n = -1, j = -1; // first violating site (row index, lag)
};

struct CriteriaReport {
    Family family = Family::L1;
    CriteriaVariant variant = CriteriaVariant::Nonuniform;
    std::vector<CriterionCheck> checks;

    bool all_pass() const;
    // Failing check with the smallest (n, j); nullptr when everything passes.
    const CriterionCheck* first_violation() const;
};

// All comparisons are strict with zero tolerance; an exact tie fails with the
// tie flag set.  Uniform variant: nonnegative / decreasing / convex on row n.
// Nonuniform variant: row-decreasing-positive, cross-row-decreasing and
// log-convex over all rows up to n.
CriteriaReport check_criteria(const KernelTable& table, int n, CriteriaVariant variant);
CriteriaReport check_criteria_rows(const std::vector<KernelRow>& rows,
                                   CriteriaVariant variant);

void write_rows_csv(const KernelTable& table, int n, std::ostream& os);  // "n,j,a_j"
void write_report_json(const CriteriaReport& report, std::ostream& os);

}
