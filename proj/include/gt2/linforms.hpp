// Integer linear-form systems psi_i(x) = sum_j L_ij x_j + v_i and the derived
// theta systems
//
//   theta_i     = q0^2 (W psi_i + b) + 1      (mu-type slots, i <= m)
//   theta_{m+i} =       W psi_i + b           (mu_3-type slots)
//
// Conditions carried as invariants: no coefficient row is identically zero
// and no two rows are rational multiples of each other. The coefficient
// bound |L_ij| <= sqrt(w)/2 is evaluated at attachment time and recorded
// (not enforced: the w = 2 reference configuration could never run
// otherwise).
#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gt2/common.hpp"

namespace gt2 {

struct LinearForm {
    std::vector<i64> coeffs;
    i64 v = 0;
};

struct LinearFormSystem {
    size_t h = 0;  // variable count
    std::vector<LinearForm> forms;

    void validate() const {
        for (const auto& f : forms) {
            if (f.coeffs.size() != h)
                throw ValidationError("linear form arity mismatch");
            bool nonzero = false;
            for (i64 c : f.coeffs) nonzero |= (c != 0);
            if (!nonzero) throw ValidationError("linear form with identically zero coefficients");
        }
        for (size_t a = 0; a < forms.size(); ++a)
            for (size_t b = a + 1; b < forms.size(); ++b)
                if (proportional(forms[a].coeffs, forms[b].coeffs))
                    throw ValidationError("coefficient rows are rational multiples of each other");
    }

    static bool proportional(const std::vector<i64>& u, const std::vector<i64>& w) {
        // u, w proportional over Q  <=>  all 2x2 minors vanish.
        for (size_t i = 0; i < u.size(); ++i)
            for (size_t j = i + 1; j < u.size(); ++j)
                if (u[i] * w[j] != u[j] * w[i]) return false;
        return true;
    }
};

struct AffineForm {
    std::vector<i64> coeffs;
    i64 constant = 0;

    i64 eval(const std::vector<i64>& x) const {
        i64 acc = constant;
        for (size_t j = 0; j < coeffs.size(); ++j) acc += coeffs[j] * x[j];
        return acc;
    }
};

struct ThetaSystem {
    LinearFormSystem base;
    u64 W = 1;
    u64 q0 = 1;
    u64 b = 1;
    size_t m = 0;                    // base.forms.size()
    std::vector<AffineForm> theta;   // 2m rows, mu-type first
    bool coeff_bound_ok = true;      // |L_ij| <= sqrt(w)/2 held
    u64 w = 0;                       // the w the bound was checked against

    size_t h() const { return base.h; }
    bool mu3_slot(size_t j) const { return j >= m; }
};

inline ThetaSystem attach_wtrick(const LinearFormSystem& base, u64 w, u64 W, u64 q0, u64 b) {
    base.validate();
    ThetaSystem t;
    t.base = base;
    t.W = W;
    t.q0 = q0;
    t.b = b;
    t.w = w;
    t.m = base.forms.size();
    const double bound = std::sqrt(double(w)) / 2.0;
    for (const auto& f : base.forms)
        for (i64 c : f.coeffs)
            if (std::abs(double(c)) > bound) t.coeff_bound_ok = false;
    const i64 Wq = i64(W) * i64(q0) * i64(q0);
    for (const auto& f : base.forms) {  // theta_i, i <= m
        AffineForm a;
        for (i64 c : f.coeffs) a.coeffs.push_back(c * Wq);
        a.constant = i64(q0) * i64(q0) * (i64(W) * f.v + i64(b)) + 1;
        t.theta.push_back(a);
    }
    for (const auto& f : base.forms) {  // theta_{m+i}
        AffineForm a;
        for (i64 c : f.coeffs) a.coeffs.push_back(c * i64(W));
        a.constant = i64(W) * f.v + i64(b);
        t.theta.push_back(a);
    }
    return t;
}

// The Conlon-Fox-Zhao family for the k-linear-forms condition: doubled
// variables x_i^{(0)}, x_i^{(1)} (column 2(i-1) + omega_i) and, for every
// j <= k and omega in {0,1}^{[k] \ {j}}, the form sum_{i != j} (i-j)
// x_i^{(omega_i)}. There are k 2^{k-1} forms in 2k variables; the i = j
// factor is absent by construction.
struct CfzForm {
    size_t j = 0;
    u32 omega = 0;  // bit i-1 = choice for variable i (bit for i == j unused)
    LinearForm form;
};

inline std::vector<CfzForm> cfz_forms(size_t k) {
    if (k < 1 || k > 6) throw ValidationError("cfz_forms: k out of range [1, 6]");
    std::vector<CfzForm> out;
    const size_t h = 2 * k;
    for (size_t j = 1; j <= k; ++j) {
        const size_t free_vars = k - 1;
        for (u32 mask = 0; mask < (1u << free_vars); ++mask) {
            CfzForm cf;
            cf.j = j;
            cf.form.coeffs.assign(h, 0);
            cf.form.v = 0;
            u32 omega = 0;
            size_t bit = 0;
            for (size_t i = 1; i <= k; ++i) {
                if (i == j) continue;
                const u32 wi = (mask >> bit) & 1u;
                ++bit;
                omega |= wi << (i - 1);
                cf.form.coeffs[2 * (i - 1) + wi] = i64(i) - i64(j);
            }
            cf.omega = omega;
            out.push_back(cf);
        }
    }
    return out;
}

inline LinearFormSystem cfz_system(size_t k) {
    LinearFormSystem sys;
    sys.h = 2 * k;
    for (const auto& cf : cfz_forms(k)) sys.forms.push_back(cf.form);
    sys.validate();
    return sys;
}

// Text fixtures: one form per line, h coefficients then the constant,
// whitespace-separated. Blank lines and '#' comments ignored.
inline LinearFormSystem parse_form_system(std::istream& in) {
    LinearFormSystem sys;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::vector<i64> nums;
        i64 v;
        while (ls >> v) nums.push_back(v);
        if (nums.empty()) continue;
        if (nums.size() < 2) throw ValidationError("form line needs >= 1 coefficient + constant");
        LinearForm f;
        f.v = nums.back();
        nums.pop_back();
        f.coeffs = nums;
        if (sys.forms.empty())
            sys.h = f.coeffs.size();
        else if (f.coeffs.size() != sys.h)
            throw ValidationError("inconsistent arity in form file");
        sys.forms.push_back(f);
    }
    sys.validate();
    return sys;
}

inline LinearFormSystem load_form_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open form system file: " + path);
    return parse_form_system(in);
}

}  // namespace gt2
