#include <mpfr.h>

#include "support.hpp"

namespace ledgerml::testing {

namespace {

constexpr mpfr_prec_t kPrec = 256;

struct Mp {
  mpfr_t v;
  Mp() { mpfr_init2(v, kPrec); }
  explicit Mp(double d) : Mp() { mpfr_set_d(v, d, MPFR_RNDN); }
  ~Mp() { mpfr_clear(v); }
  Mp(const Mp&) = delete;
  Mp& operator=(const Mp&) = delete;
  [[nodiscard]] double get() const { return mpfr_get_d(v, MPFR_RNDN); }
};

}  // namespace

double mpfr_exp(double x) {
  Mp r(x);
  mpfr_exp(r.v, r.v, MPFR_RNDN);
  return r.get();
}

double mpfr_ln(double x) {
  Mp r(x);
  mpfr_log(r.v, r.v, MPFR_RNDN);
  return r.get();
}

double mpfr_logit(double x) {
  Mp r(x);
  mpfr_neg(r.v, r.v, MPFR_RNDN);
  mpfr_exp(r.v, r.v, MPFR_RNDN);
  mpfr_add_ui(r.v, r.v, 1, MPFR_RNDN);
  mpfr_ui_div(r.v, 1, r.v, MPFR_RNDN);
  return r.get();
}

std::vector<double> mpfr_softmax(const std::vector<double>& v) {
  std::vector<Mp> e(v.size());
  Mp total(0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    mpfr_set_d(e[i].v, v[i], MPFR_RNDN);
    mpfr_exp(e[i].v, e[i].v, MPFR_RNDN);
    mpfr_add(total.v, total.v, e[i].v, MPFR_RNDN);
  }
  std::vector<double> out;
  for (auto& t : e) {
    mpfr_div(t.v, t.v, total.v, MPFR_RNDN);
    out.push_back(t.get());
  }
  return out;
}

}  // namespace ledgerml::testing
