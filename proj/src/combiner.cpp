#include "tdetect/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tdetect/error.hpp"
#include "tdetect/hash.hpp"

namespace tdetect {

std::string_view to_string(CombinerKind kind) {
  return kind == CombinerKind::ridge ? "ridge" : "linear_svr";
}

namespace {

constexpr std::size_t kMinRows = 10;

std::string dev_hash(std::span<const LabeledPair> dev) {
  Sha256 h;
  for (const auto& row : dev) {
    h.field(row.s_t).field(row.s_c).field(to_string(row.label));
  }
  return h.hex_digest().substr(0, 16);
}

double target(Label label) { return label == Label::machine ? 1.0 : 0.0; }

CombinerModel fit_linear_svr(std::span<const LabeledPair> dev, const CombinerHyper& hyper) {
  const std::size_t n = dev.size();
  const double upper = hyper.c / static_cast<double>(n);
  const double eps = hyper.epsilon;
  std::vector<double> beta(n, 0.0);
  double w[3] = {0.0, 0.0, 0.0};  // w_t, w_c, bias

  int epoch = 0;
  for (; epoch < hyper.max_iterations; ++epoch) {
    double max_violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x[3] = {dev[i].s_t, dev[i].s_c, 1.0};
      const double qii = x[0] * x[0] + x[1] * x[1] + 1.0;
      const double g = w[0] * x[0] + w[1] * x[1] + w[2] - target(dev[i].label);
      const double gp = g + eps;
      const double gn = g - eps;

      double violation;
      if (beta[i] == 0.0) {
        violation = gp < 0.0 ? -gp : (gn > 0.0 ? gn : 0.0);
      } else if (beta[i] >= upper) {
        violation = gp > 0.0 ? gp : 0.0;
      } else if (beta[i] <= -upper) {
        violation = gn < 0.0 ? -gn : 0.0;
      } else {
        violation = std::fabs(beta[i] > 0.0 ? gp : gn);
      }
      max_violation = std::max(max_violation, violation);

      // Exact minimiser of the one-variable subproblem, then clipped.
      double step;
      if (gp < qii * beta[i]) {
        step = -gp / qii;
      } else if (gn > qii * beta[i]) {
        step = -gn / qii;
      } else {
        step = -beta[i];
      }
      const double updated = std::clamp(beta[i] + step, -upper, upper);
      const double delta = updated - beta[i];
      if (delta != 0.0) {
        beta[i] = updated;
        for (int k = 0; k < 3; ++k) w[k] += delta * x[k];
      }
    }
    if (max_violation < hyper.tolerance) {
      ++epoch;
      break;
    }
  }

  CombinerModel model;
  model.kind = CombinerKind::linear_svr;
  model.weights = {w[0], w[1]};
  model.bias = w[2];
  model.training_meta.iterations = epoch;
  return model;
}

CombinerModel fit_ridge(std::span<const LabeledPair> dev, const CombinerHyper& hyper) {
  const auto n = static_cast<double>(dev.size());
  double mt = 0.0, mc = 0.0, my = 0.0;
  for (const auto& row : dev) {
    mt += row.s_t;
    mc += row.s_c;
    my += target(row.label);
  }
  mt /= n, mc /= n, my /= n;
  double stt = 0.0, scc = 0.0, stc = 0.0, sty = 0.0, scy = 0.0;
  for (const auto& row : dev) {
    const double t = row.s_t - mt, c = row.s_c - mc, y = target(row.label) - my;
    stt += t * t, scc += c * c, stc += t * c, sty += t * y, scy += c * y;
  }
  const double ridge = 1.0 / hyper.c;
  const double a = stt / n + ridge, b = stc / n, d = scc / n + ridge;
  const double rt = sty / n, rc = scy / n;
  const double det = a * d - b * b;
  CombinerModel model;
  model.kind = CombinerKind::ridge;
  model.weights = {(d * rt - b * rc) / det, (a * rc - b * rt) / det};
  model.bias = my - model.weights[0] * mt - model.weights[1] * mc;
  model.training_meta.iterations = 1;
  return model;
}

}  // namespace

CombinerModel fit_combiner(std::span<const LabeledPair> dev, const CombinerHyper& hyper) {
  if (dev.size() < kMinRows) {
    throw Error(ErrorCode::InsufficientData, "combiner needs at least 10 dev rows");
  }
  const bool has_machine = std::any_of(dev.begin(), dev.end(),
                                       [](const auto& r) { return r.label == Label::machine; });
  const bool has_human = std::any_of(dev.begin(), dev.end(),
                                     [](const auto& r) { return r.label == Label::human; });
  if (!has_machine || !has_human) {
    throw Error(ErrorCode::DegenerateTraining, "dev set contains a single class");
  }
  if (!(hyper.c > 0.0) || !(hyper.epsilon >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "combiner needs C > 0 and epsilon >= 0");
  }
  for (const auto& row : dev) {
    if (!std::isfinite(row.s_t) || !std::isfinite(row.s_c)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite score in dev set");
    }
  }
  CombinerModel model = hyper.kind == CombinerKind::ridge ? fit_ridge(dev, hyper)
                                                          : fit_linear_svr(dev, hyper);
  model.training_meta.epsilon = hyper.epsilon;
  model.training_meta.c = hyper.c;
  model.training_meta.dev_hash = dev_hash(dev);
  return model;
}

nlohmann::json to_json(const CombinerModel& model) {
  return {{"kind", to_string(model.kind)},
          {"weights", {model.weights[0], model.weights[1]}},
          {"bias", model.bias},
          {"training_meta",
           {{"epsilon", model.training_meta.epsilon},
            {"C", model.training_meta.c},
            {"iterations", model.training_meta.iterations},
            {"dev_hash", model.training_meta.dev_hash}}}};
}

CombinerModel combiner_from_json(const nlohmann::json& doc) {
  try {
    CombinerModel model;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "linear_svr") {
      model.kind = CombinerKind::linear_svr;
    } else if (kind == "ridge") {
      model.kind = CombinerKind::ridge;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown combiner kind: " + kind);
    }
    const auto& w = doc.at("weights");
    if (!w.is_array() || w.size() != 2) {
      throw Error(ErrorCode::InvalidArgument, "combiner weights must have 2 entries");
    }
    model.weights = {w[0].get<double>(), w[1].get<double>()};
    model.bias = doc.at("bias").get<double>();
    if (auto meta = doc.find("training_meta"); meta != doc.end()) {
      model.training_meta.epsilon = meta->value("epsilon", 0.0);
      model.training_meta.c = meta->value("C", 0.0);
      model.training_meta.iterations = meta->value("iterations", 0);
      model.training_meta.dev_hash = meta->value("dev_hash", std::string());
    }
    if (!std::isfinite(model.weights[0]) || !std::isfinite(model.weights[1]) ||
        !std::isfinite(model.bias)) {
      throw Error(ErrorCode::InvalidArgument, "combiner weights must be finite");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed combiner model: ") + e.what());
  }
}

}  // namespace tdetect
