#include "slowfast.h"

#include <exception>
#include <string>
#include <utility>

#include "slowfast/dynamics.hpp"
#include "slowfast/errors.hpp"
#include "slowfast/jet.hpp"
#include "slowfast/model.hpp"
#include "slowfast/reduction.hpp"
#include "slowfast/runner.hpp"
#include "slowfast/slow_manifold.hpp"

struct sf_model {
  slowfast::Model model;
  std::string source;
};

struct sf_trajectory {
  slowfast::Trajectory traj;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
sf_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return SF_OK;
  } catch (const slowfast::Error& e) {
    g_last_error = e.what();
    return static_cast<sf_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SF_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SF_INTERNAL;
  }
}

sf_status null_argument(const char* what) noexcept {
  g_last_error = std::string("null argument: ") + what;
  return SF_INVALID_ARGUMENT;
}

sf_model* wrap(slowfast::Model m) {
  std::string src = m.source();
  return new sf_model{std::move(m), std::move(src)};
}

slowfast::PhasePoint to_point(const double p[4]) {
  return {p[0], p[1], p[2], p[3]};
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "1.0.0"; }

const char* sf_status_name(sf_status status) {
  return slowfast::error_code_name(
      static_cast<slowfast::ErrorCode>(static_cast<int>(status)));
}

const char* sf_last_error(void) { return g_last_error.c_str(); }

sf_status sf_model_parse(const char* text, sf_model** out) {
  if (!text || !out) return null_argument("sf_model_parse");
  return guarded([&] { *out = wrap(slowfast::Model::parse(text)); });
}

sf_status sf_model_load(const char* path, sf_model** out) {
  if (!path || !out) return null_argument("sf_model_load");
  return guarded([&] { *out = wrap(slowfast::Model::load(path)); });
}

sf_status sf_model_builtin(const char* family, sf_model** out) {
  if (!family || !out) return null_argument("sf_model_builtin");
  return guarded([&] { *out = wrap(slowfast::Model::builtin(family)); });
}

sf_status sf_model_bind(sf_model* model, const char* name, double value) {
  if (!model || !name) return null_argument("sf_model_bind");
  return guarded([&] { model->model = model->model.bind(name, value); });
}

void sf_model_free(sf_model* model) { delete model; }

const char* sf_model_source(const sf_model* model) {
  return model ? model->source.c_str() : "";
}

uint64_t sf_model_hash(const sf_model* model) {
  return model ? model->model.hash() : 0;
}

sf_status sf_model_eval(const sf_model* model, const double point[4],
                        double* out) {
  if (!model || !point || !out) return null_argument("sf_model_eval");
  return guarded([&] {
    *out = model->model.eval({point[0], point[1], point[2], point[3]});
  });
}

sf_status sf_model_partial(const sf_model* model, const double point[4],
                           const int orders[4], double* out) {
  if (!model || !point || !orders || !out)
    return null_argument("sf_model_partial");
  return guarded([&] {
    int total = 0;
    slowfast::Multi multi{};
    for (int i = 0; i < 4; ++i) {
      if (orders[i] < 0)
        slowfast::fail(slowfast::ErrorCode::invalid_argument,
                       "derivative orders must be non-negative");
      multi[i] = static_cast<std::uint8_t>(orders[i]);
      total += orders[i];
    }
    if (total > 8)
      slowfast::fail(slowfast::ErrorCode::invalid_argument,
                     "total derivative order must be <= 8");
    slowfast::Jet jet = model->model.full_jet(
        {point[0], point[1], point[2], point[3]}, total);
    *out = jet.partial(multi);
  });
}

sf_status sf_vector_field(const sf_model* model, const double point[4],
                          double eps, double out[4]) {
  if (!model || !point || !out) return null_argument("sf_vector_field");
  return guarded([&] {
    auto f = slowfast::vector_field_full(model->model, to_point(point), eps);
    for (int i = 0; i < 4; ++i) out[i] = f[i];
  });
}

sf_status sf_integrate(const sf_model* model, const double point[4],
                       double eps, double t0, double t1, double h, int stride,
                       sf_trajectory** out) {
  if (!model || !point || !out) return null_argument("sf_integrate");
  return guarded([&] {
    *out = new sf_trajectory{slowfast::integrate(
        model->model, to_point(point), eps, t0, t1, h, stride)};
  });
}

void sf_trajectory_free(sf_trajectory* traj) { delete traj; }

size_t sf_trajectory_size(const sf_trajectory* traj) {
  return traj ? traj->traj.size() : 0;
}

sf_status sf_trajectory_sample(const sf_trajectory* traj, size_t index,
                               double* t, double state[4]) {
  if (!traj || !t || !state) return null_argument("sf_trajectory_sample");
  if (index >= traj->traj.size()) {
    g_last_error = "sample index out of range";
    return SF_INVALID_ARGUMENT;
  }
  *t = traj->traj.times[index];
  auto a = traj->traj.states[index].array();
  for (int i = 0; i < 4; ++i) state[i] = a[i];
  g_last_error.clear();
  return SF_OK;
}

double sf_trajectory_energy_drift(const sf_trajectory* traj) {
  return traj ? traj->traj.max_energy_drift : 0.0;
}

int sf_trajectory_aborted(const sf_trajectory* traj) {
  return traj && traj->traj.aborted ? 1 : 0;
}

sf_status sf_classify(const sf_model* model, const double point[4],
                      sf_classification* out) {
  if (!model || !point || !out) return null_argument("sf_classify");
  return guarded([&] {
    auto fast = slowfast::solve_critical_point(model->model, point[2],
                                               point[3], {point[0], point[1]});
    slowfast::PhasePoint p{fast[0], fast[1], point[2], point[3]};
    slowfast::SingularPointRecord rec =
        slowfast::classify_singular_point(model->model, p);
    auto a = rec.location.array();
    for (int i = 0; i < 4; ++i) out->point[i] = a[i];
    out->kind = static_cast<int>(rec.classification);
    out->degenerate_reason = static_cast<int>(rec.reason);
    out->delta = rec.delta_value;
    auto it = rec.margins.find("transversality");
    out->transversality = it != rec.margins.end() ? it->second : 0.0;
    out->chart_valid = rec.chart_valid ? 1 : 0;
  });
}

sf_status sf_fold_coefficients(const sf_model* model, double c,
                               sf_fold_data* out) {
  if (!model || !out) return null_argument("sf_fold_coefficients");
  return guarded([&] {
    slowfast::FoldLimitSystem sys =
        slowfast::fold_coefficients(model->model, c);
    out->alpha_c = sys.alpha_c;
    out->gamma_c = sys.gamma_c;
    out->s1 = sys.s1;
    auto a = sys.trace.point.array();
    for (int i = 0; i < 4; ++i) out->trace_point[i] = a[i];
    out->transversality = sys.trace.transversality;
  });
}

sf_status sf_cusp_coefficients(const sf_model* model, double c,
                               sf_cusp_data* out) {
  if (!model || !out) return null_argument("sf_cusp_coefficients");
  return guarded([&] {
    slowfast::CuspLimitSystem sys =
        slowfast::cusp_coefficients(model->model, c);
    out->rho = sys.rho;
    out->sigma = sys.sigma;
    out->beta = sys.beta;
    out->alpha = sys.alpha;
    out->beta_literal = sys.beta_literal;
    out->genericity_det = sys.genericity_det;
    out->generic = sys.generic ? 1 : 0;
    auto a = sys.trace.point.array();
    for (int i = 0; i < 4; ++i) out->trace_point[i] = a[i];
    out->transversality = sys.trace.transversality;
  });
}

sf_status sf_run(const char* command, const char* config_path,
                 const char* out_dir, uint64_t seed, int* exit_code) {
  if (!command || !config_path) return null_argument("sf_run");
  slowfast::RunResult res = slowfast::run_command(
      command, config_path, out_dir ? out_dir : "", seed);
  if (exit_code) *exit_code = res.exit_code;
  g_last_error = res.message;
  return static_cast<sf_status>(static_cast<int>(res.code));
}

}  // extern "C"
