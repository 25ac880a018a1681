#include "ncreg/penalty.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace ncreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sgn(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

[[noreturn]] void bad_field(const std::string& family, const std::string& field,
                            const std::string& requirement) {
  throw std::invalid_argument("PenaltySpec(" + family + "): " + field + " must be " +
                              requirement);
}

void require_finite_positive(const std::string& fam, const std::string& field, double v) {
  if (!std::isfinite(v) || v <= 0.0) bad_field(fam, field, "finite and > 0");
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::none: return "none";
    case Family::l1: return "l1";
    case Family::l2: return "l2";
    case Family::bridge: return "bridge";
    case Family::scad: return "scad";
    case Family::mcp: return "mcp";
    case Family::laplace: return "laplace";
    case Family::arctan: return "arctan";
    case Family::geman_mcclure: return "geman_mcclure";
    case Family::log_penalty: return "log_penalty";
    case Family::capped_l1: return "capped_l1";
  }
  throw std::logic_error("family_name: unhandled enum value");
}

Family family_from_name(const std::string& name) {
  static const std::map<std::string, Family> lut = {
      {"none", Family::none},
      {"l1", Family::l1},
      {"l2", Family::l2},
      {"bridge", Family::bridge},
      {"scad", Family::scad},
      {"mcp", Family::mcp},
      {"laplace", Family::laplace},
      {"arctan", Family::arctan},
      {"geman_mcclure", Family::geman_mcclure},
      {"log_penalty", Family::log_penalty},
      {"capped_l1", Family::capped_l1},
  };
  auto it = lut.find(name);
  if (it == lut.end()) throw std::invalid_argument("unknown penalty family: " + name);
  return it->second;
}

void PenaltySpec::validate() const {
  const std::string fam = family_name(family);
  if (!std::isfinite(lambda) || lambda < 0.0) bad_field(fam, "lambda", "finite and >= 0");
  switch (family) {
    case Family::none:
    case Family::l1:
    case Family::l2:
      break;
    case Family::bridge:
      require_finite_positive(fam, "kappa", kappa);
      break;
    case Family::scad:
      if (!std::isfinite(a) || a <= 2.0) bad_field(fam, "a", "finite and > 2");
      break;
    case Family::mcp:
      require_finite_positive(fam, "b", b);
      break;
    case Family::laplace:
      if (!std::isfinite(epsilon) || epsilon <= 0.0 || epsilon >= 1.0)
        bad_field(fam, "epsilon", "in the open interval (0, 1)");
      break;
    case Family::arctan:
      require_finite_positive(fam, "gamma", gamma);
      break;
    case Family::geman_mcclure:
    case Family::log_penalty:
      require_finite_positive(fam, "sigma", sigma);
      break;
    case Family::capped_l1:
      require_finite_positive(fam, "c", c);
      break;
  }
}

PenaltySpec PenaltySpec::none() { return PenaltySpec{}; }

PenaltySpec PenaltySpec::l1(double lambda) {
  PenaltySpec s;
  s.family = Family::l1;
  s.lambda = lambda;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::l2(double lambda) {
  PenaltySpec s;
  s.family = Family::l2;
  s.lambda = lambda;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::bridge(double lambda, double kappa) {
  PenaltySpec s;
  s.family = Family::bridge;
  s.lambda = lambda;
  s.kappa = kappa;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::scad(double lambda, double a) {
  PenaltySpec s;
  s.family = Family::scad;
  s.lambda = lambda;
  s.a = a;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::mcp(double lambda, double b) {
  PenaltySpec s;
  s.family = Family::mcp;
  s.lambda = lambda;
  s.b = b;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::laplace(double lambda, double epsilon) {
  PenaltySpec s;
  s.family = Family::laplace;
  s.lambda = lambda;
  s.epsilon = epsilon;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::arctan(double lambda, double gamma) {
  PenaltySpec s;
  s.family = Family::arctan;
  s.lambda = lambda;
  s.gamma = gamma;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::geman_mcclure(double lambda, double sigma) {
  PenaltySpec s;
  s.family = Family::geman_mcclure;
  s.lambda = lambda;
  s.sigma = sigma;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::log_penalty(double lambda, double sigma) {
  PenaltySpec s;
  s.family = Family::log_penalty;
  s.lambda = lambda;
  s.sigma = sigma;
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::capped_l1(double lambda, double c) {
  PenaltySpec s;
  s.family = Family::capped_l1;
  s.lambda = lambda;
  s.c = c;
  s.validate();
  return s;
}

nlohmann::json to_json(const PenaltySpec& spec) {
  nlohmann::json j;
  j["family"] = family_name(spec.family);
  j["lambda"] = spec.lambda;
  switch (spec.family) {
    case Family::none:
    case Family::l1:
    case Family::l2: break;
    case Family::bridge: j["kappa"] = spec.kappa; break;
    case Family::scad: j["a"] = spec.a; break;
    case Family::mcp: j["b"] = spec.b; break;
    case Family::laplace: j["epsilon"] = spec.epsilon; break;
    case Family::arctan: j["gamma"] = spec.gamma; break;
    case Family::geman_mcclure:
    case Family::log_penalty: j["sigma"] = spec.sigma; break;
    case Family::capped_l1: j["c"] = spec.c; break;
  }
  return j;
}

PenaltySpec penalty_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("PenaltySpec: expected a JSON object");
  static const std::map<std::string, double PenaltySpec::*> fields = {
      {"lambda", &PenaltySpec::lambda}, {"epsilon", &PenaltySpec::epsilon},
      {"gamma", &PenaltySpec::gamma},   {"a", &PenaltySpec::a},
      {"b", &PenaltySpec::b},           {"kappa", &PenaltySpec::kappa},
      {"sigma", &PenaltySpec::sigma},   {"c", &PenaltySpec::c},
  };
  PenaltySpec spec;
  bool have_family = false;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "family") {
      spec.family = family_from_name(it.value().get<std::string>());
      have_family = true;
      continue;
    }
    auto f = fields.find(it.key());
    if (f == fields.end())
      throw std::invalid_argument("PenaltySpec: unknown key \"" + it.key() + "\"");
    if (!it.value().is_number())
      throw std::invalid_argument("PenaltySpec: key \"" + it.key() + "\" must be a number");
    spec.*(f->second) = it.value().get<double>();
  }
  if (!have_family) throw std::invalid_argument("PenaltySpec: missing \"family\"");
  spec.validate();
  return spec;
}

double penalty_value(const PenaltySpec& spec, double t) {
  if (!std::isfinite(t)) throw std::domain_error("penalty_value: non-finite t");
  const double x = std::fabs(t);
  const double lam = spec.lambda;
  switch (spec.family) {
    case Family::none:
      return 0.0;
    case Family::l1:
      return lam * x;
    case Family::l2:
      return lam * x * x;
    case Family::bridge:
      return lam * std::pow(x, spec.kappa);
    case Family::scad: {
      if (lam == 0.0) return 0.0;
      const double a = spec.a;
      if (x <= lam) return lam * x;
      if (x <= a * lam) return -(x * x - 2.0 * a * lam * x + lam * lam) / (2.0 * (a - 1.0));
      return (a + 1.0) * lam * lam / 2.0;
    }
    case Family::mcp: {
      if (lam == 0.0) return 0.0;
      const double b = spec.b;
      if (x <= b * lam) return lam * x - x * x / (2.0 * b);
      return b * lam * lam / 2.0;
    }
    case Family::laplace:
      // 1 - eps^x via expm1 keeps precision for small x
      return lam * (-std::expm1(x * std::log(spec.epsilon)));
    case Family::arctan:
      return lam * (2.0 / kPi) * std::atan(spec.gamma * x);
    case Family::geman_mcclure:
      return lam * x / (spec.sigma + x);
    case Family::log_penalty:
      return lam * std::log1p(x / spec.sigma);
    case Family::capped_l1:
      return lam * std::min(x / spec.c, 1.0);
  }
  throw std::logic_error("penalty_value: unhandled family");
}

double penalty_deriv(const PenaltySpec& spec, double t) {
  if (!std::isfinite(t)) throw std::domain_error("penalty_deriv: non-finite t");
  if (t == 0.0)
    throw std::domain_error("penalty_deriv: t == 0 is a kink; use subgradient_interval");
  const double x = std::fabs(t);
  const double s = sgn(t);
  const double lam = spec.lambda;
  switch (spec.family) {
    case Family::none:
      return 0.0;
    case Family::l1:
      return lam * s;
    case Family::l2:
      return 2.0 * lam * t;
    case Family::bridge:
      return lam * spec.kappa * std::pow(x, spec.kappa - 1.0) * s;
    case Family::scad: {
      if (lam == 0.0) return 0.0;
      const double a = spec.a;
      if (x <= lam) return lam * s;
      if (x <= a * lam) return s * (a * lam - x) / (a - 1.0);
      return 0.0;
    }
    case Family::mcp: {
      if (lam == 0.0) return 0.0;
      if (x <= spec.b * lam) return s * (lam - x / spec.b);
      return 0.0;
    }
    case Family::laplace: {
      const double log_eps = std::log(spec.epsilon);
      return s * lam * (-log_eps) * std::exp(x * log_eps);
    }
    case Family::arctan: {
      const double g = spec.gamma;
      return s * lam * (2.0 * g / kPi) / (1.0 + g * g * t * t);
    }
    case Family::geman_mcclure: {
      const double d = spec.sigma + x;
      return s * lam * spec.sigma / (d * d);
    }
    case Family::log_penalty:
      return s * lam / (spec.sigma + x);
    case Family::capped_l1:
      if (x == spec.c)
        throw std::domain_error("penalty_deriv: capped_l1 kink at |t| == c");
      return x < spec.c ? s * lam / spec.c : 0.0;
  }
  throw std::logic_error("penalty_deriv: unhandled family");
}

std::pair<double, double> subgradient_interval(const PenaltySpec& spec) {
  const double lam = spec.lambda;
  double slope = 0.0;  // one-sided derivative at 0+, divided by lambda where it scales
  switch (spec.family) {
    case Family::none:
    case Family::l2:
      return {0.0, 0.0};
    case Family::l1:
      slope = lam;
      break;
    case Family::bridge:
      if (spec.kappa < 1.0)
        throw std::invalid_argument(
            "subgradient_interval: bridge with kappa < 1 has an unbounded subdifferential at 0");
      slope = (spec.kappa == 1.0) ? lam : 0.0;
      break;
    case Family::scad:
    case Family::mcp:
      slope = lam;
      break;
    case Family::laplace:
      slope = lam * (-std::log(spec.epsilon));
      break;
    case Family::arctan:
      slope = lam * 2.0 * spec.gamma / kPi;
      break;
    case Family::geman_mcclure:
    case Family::log_penalty:
      slope = lam / spec.sigma;
      break;
    case Family::capped_l1:
      throw std::invalid_argument(
          "subgradient_interval: capped_l1 is nondifferentiable away from 0 and is excluded");
  }
  return {-slope, slope};
}

double lipschitz_bound(const PenaltySpec& spec) {
  switch (spec.family) {
    case Family::l2:
      throw std::invalid_argument("lipschitz_bound: l2 is not globally Lipschitz");
    case Family::bridge:
      if (spec.kappa != 1.0)
        throw std::invalid_argument(
            "lipschitz_bound: bridge is globally Lipschitz only for kappa == 1");
      return spec.lambda;
    case Family::capped_l1:
      return spec.lambda / spec.c;
    default:
      return subgradient_interval(spec).second;
  }
}

double weak_convexity_mu(const PenaltySpec& spec) {
  const double lam = spec.lambda;
  if (lam == 0.0) return 0.0;
  switch (spec.family) {
    case Family::none:
    case Family::l1:
    case Family::l2:
      return 0.0;
    case Family::bridge:
      if (spec.kappa >= 1.0) return 0.0;
      throw std::invalid_argument(
          "weak_convexity_mu: bridge with kappa < 1 admits no finite mu");
    case Family::scad:
      return 1.0 / (spec.a - 1.0);
    case Family::mcp:
      return 1.0 / spec.b;
    case Family::laplace: {
      const double log_eps = std::log(spec.epsilon);
      return lam * log_eps * log_eps;
    }
    case Family::arctan:
      return 2.0 * lam * spec.gamma * spec.gamma / kPi;
    case Family::geman_mcclure:
      return 2.0 * lam / (spec.sigma * spec.sigma);
    case Family::log_penalty:
    case Family::capped_l1:
      throw std::invalid_argument("weak_convexity_mu: unsupported family " +
                                  family_name(spec.family));
  }
  throw std::logic_error("weak_convexity_mu: unhandled family");
}

DCParts dc_components(const PenaltySpec& spec, double t) {
  if (!std::isfinite(t)) throw std::domain_error("dc_components: non-finite t");
  const double x = std::fabs(t);
  const double s = sgn(t);
  const double lam = spec.lambda;
  DCParts out;
  switch (spec.family) {
    case Family::none:
      return out;
    case Family::l1:
      out.g_value = lam * x;
      return out;
    case Family::laplace: {
      const double log_eps = std::log(spec.epsilon);
      const double one_minus_eps_x = -std::expm1(x * log_eps);
      out.g_value = lam * (-log_eps) * x;
      out.h_value = out.g_value - lam * one_minus_eps_x;
      out.h_deriv = s * lam * (-log_eps) * one_minus_eps_x;
      out.h_lipschitz = lam * log_eps * log_eps;
      return out;
    }
    case Family::arctan: {
      const double g = spec.gamma;
      out.g_value = lam * g * x;
      out.h_value = lam * (g * x - std::atan(g * x));
      out.h_deriv = s * lam * g * (g * g * t * t) / (1.0 + g * g * t * t);
      out.h_lipschitz = lam * g * g;
      return out;
    }
    case Family::scad: {
      out.g_value = lam * x;
      out.h_value = out.g_value - penalty_value(spec, t);
      if (lam == 0.0) return out;
      const double aa = spec.a;
      if (x <= lam)
        out.h_deriv = 0.0;
      else if (x <= aa * lam)
        out.h_deriv = s * (x - lam) / (aa - 1.0);
      else
        out.h_deriv = s * lam;
      out.h_lipschitz = 1.0 / (aa - 1.0);
      return out;
    }
    case Family::mcp: {
      out.g_value = lam * x;
      out.h_value = out.g_value - penalty_value(spec, t);
      if (lam == 0.0) return out;
      out.h_deriv = s * std::min(x / spec.b, lam);
      out.h_lipschitz = 1.0 / spec.b;
      return out;
    }
    default:
      throw std::invalid_argument("dc_components: unsupported family " +
                                  family_name(spec.family));
  }
}

DCParts dc_components_penalty_scale(const PenaltySpec& spec, double t) {
  DCParts out = dc_components(spec, t);
  if (spec.family == Family::arctan) {
    const double f = 2.0 / kPi;
    out.g_value *= f;
    out.h_value *= f;
    out.h_deriv *= f;
    out.h_lipschitz *= f;
  }
  return out;
}

}  // namespace ncreg
