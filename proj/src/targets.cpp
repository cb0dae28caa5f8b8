// Copyright (c) 2026 The lcmlab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lcm/targets.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lcm/error.hpp"

namespace lcm::targets {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_class(std::int64_t class_id, std::size_t c) {
  if (c == 0) throw ValidationError("target: need at least one class");
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= c)
    throw ValidationError("target: class id " + std::to_string(class_id) + " outside [0, " + std::to_string(c) +
                          ")");
}

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ValidationError("label smoothing: epsilon must lie in (0, 1), got " + std::to_string(eps));
}

void check_alpha(double alpha) {
  if (!(alpha >= kMinAlpha) || !std::isfinite(alpha))
    throw ValidationError("lcm: alpha must be finite and at least 0.5, got " + std::to_string(alpha));
}

std::string number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void validate(const TargetStrategy& strategy) {
  std::visit(Overloaded{
                 [](const OneHot&) {},
                 [](const LabelSmoothing& s) { check_epsilon(s.epsilon); },
                 [](const Lcm& s) {
                   check_alpha(s.alpha);
                   if (s.stop_epoch && *s.stop_epoch < 1)
                     throw ValidationError("lcm: stop_epoch must be a positive integer");
                 },
             },
             strategy);
}

std::string describe(const TargetStrategy& strategy) {
  return std::visit(Overloaded{
                        [](const OneHot&) { return std::string("one-hot"); },
                        [](const LabelSmoothing& s) { return "ls(" + number(s.epsilon) + ")"; },
                        [](const Lcm& s) {
                          std::string out = "lcm(" + number(s.alpha);
                          if (s.stop_epoch) out += ",stop=" + std::to_string(*s.stop_epoch);
                          if (s.detach_target) out += ",detach";
                          return out + ")";
                        },
                    },
                    strategy);
}

TargetStrategy parse_strategy(std::string_view text) {
  const std::string src(text);
  auto bad = [&](const std::string& why) {
    return ValidationError("strategy \"" + src + "\": " + why);
  };
  auto to_double = [&](const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      throw bad("expected a number, got \"" + v + "\"");
    }
    if (used != v.size()) throw bad("expected a number, got \"" + v + "\"");
    return x;
  };
  std::string head = src;
  std::vector<std::string> args;
  if (auto open = src.find('('); open != std::string::npos) {
    if (src.back() != ')') throw bad("missing ')'");
    head = src.substr(0, open);
    std::stringstream inner(src.substr(open + 1, src.size() - open - 2));
    for (std::string part; std::getline(inner, part, ',');) args.push_back(part);
  }
  TargetStrategy out;
  if (head == "one-hot" || head == "onehot") {
    if (!args.empty()) throw bad("one-hot takes no parameters");
    out = OneHot{};
  } else if (head == "ls") {
    LabelSmoothing s;
    if (args.size() > 1) throw bad("ls takes one parameter");
    if (!args.empty()) s.epsilon = to_double(args[0]);
    out = s;
  } else if (head == "lcm") {
    Lcm s;
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a == "detach") {
        s.detach_target = true;
      } else if (a.rfind("stop=", 0) == 0) {
        const double e = to_double(a.substr(5));
        if (e != std::floor(e)) throw bad("stop epoch must be an integer");
        s.stop_epoch = static_cast<int>(e);
      } else if (i == 0) {
        s.alpha = to_double(a);
      } else {
        throw bad("unknown parameter \"" + a + "\"");
      }
    }
    out = s;
  } else {
    throw bad("unknown kind \"" + head + "\" (expected one-hot, ls or lcm)");
  }
  validate(out);
  return out;
}

bool uses_lcm(const TargetStrategy& strategy) { return std::holds_alternative<Lcm>(strategy); }

bool lcm_active(const TargetStrategy& strategy, int epoch) {
  const auto* s = std::get_if<Lcm>(&strategy);
  return s && !(s->stop_epoch && epoch >= *s->stop_epoch);
}

TargetDistribution one_hot_target(std::int64_t class_id, std::size_t num_classes) {
  check_class(class_id, num_classes);
  TargetDistribution t{std::vector<double>(num_classes, 0.0), "one-hot"};
  t.values[static_cast<std::size_t>(class_id)] = 1.0;
  return t;
}

TargetDistribution label_smoothing_target(std::int64_t class_id, std::size_t num_classes, double epsilon) {
  check_class(class_id, num_classes);
  check_epsilon(epsilon);
  const double floor = epsilon / static_cast<double>(num_classes);
  TargetDistribution t{std::vector<double>(num_classes, floor), "ls(" + number(epsilon) + ")"};
  t.values[static_cast<std::size_t>(class_id)] = (1.0 - epsilon) + floor;
  return t;
}

std::vector<double> label_confusion_distribution(std::span<const double> representation,
                                                 const ad::Tensor& label_reps, const LcmHeadParams& head) {
  ad::Tape tape;
  LcmBatchInputs in;
  in.representations = tape.constant(
      ad::Tensor::matrix(1, representation.size(), {representation.begin(), representation.end()}));
  in.label_reps = tape.constant(label_reps);
  in.head_weight = tape.constant(head.weight);
  in.head_bias = tape.constant(head.bias);
  return tape.value(label_confusion_batch(in)).values();
}

std::vector<double> simulated_label_distribution(std::span<const double> one_hot, std::span<const double> lcd,
                                                 double alpha) {
  if (one_hot.size() != lcd.size())
    throw ShapeError("simulated_label_distribution: one-hot length " + std::to_string(one_hot.size()) +
                     " differs from LCD length " + std::to_string(lcd.size()));
  check_alpha(alpha);
  std::size_t ones = 0;
  for (double v : one_hot) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      ones = 2;
      break;
    }
  }
  if (ones != 1) throw ValidationError("simulated_label_distribution: target is not one-hot");
  std::vector<double> logits(one_hot.size());
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = alpha * one_hot[i] + lcd[i];
  return ad::softmax(logits);
}

double lcm_loss(std::span<const double> sld, std::span<const double> pld) { return ad::kl_divergence(sld, pld); }

TargetDistribution make_target(const TargetStrategy& strategy, std::int64_t class_id, std::size_t num_classes,
                               const std::optional<LcmInputs>& lcm, int epoch) {
  validate(strategy);
  if (const auto* ls = std::get_if<LabelSmoothing>(&strategy))
    return label_smoothing_target(class_id, num_classes, ls->epsilon);
  if (!lcm_active(strategy, epoch)) return one_hot_target(class_id, num_classes);
  if (!lcm) throw ValidationError("make_target: LCM strategy needs encoder outputs");
  const auto& s = std::get<Lcm>(strategy);
  auto y_t = one_hot_target(class_id, num_classes);
  auto y_c = label_confusion_distribution(lcm->representation, lcm->label_reps, lcm->head);
  if (y_c.size() != num_classes)
    throw ShapeError("make_target: LCD has " + std::to_string(y_c.size()) + " entries for " +
                     std::to_string(num_classes) + " classes");
  return {simulated_label_distribution(y_t.values, y_c, s.alpha), describe(strategy)};
}

ad::Tensor one_hot_rows(std::span<const std::int32_t> labels, std::size_t num_classes) {
  if (labels.empty()) throw ValidationError("one_hot_rows: empty label list");
  ad::Tensor out(ad::Shape{labels.size(), num_classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_class(labels[i], num_classes);
    out.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return out;
}

ad::Var label_confusion_batch(const LcmBatchInputs& in) {
  // Similarity of every instance to every label: B x C.
  ad::Var sims = ad::matmul(in.representations, ad::transpose(in.label_reps));
  return ad::softmax(ad::add_bias(ad::matmul(sims, in.head_weight), in.head_bias));
}

ad::Var simulated_label_batch(ad::Var one_hot, ad::Var lcd, double alpha) {
  check_alpha(alpha);
  return ad::softmax(ad::add(ad::scale(one_hot, alpha), lcd));
}

ad::Var target_batch(ad::Tape& tape, const TargetStrategy& strategy, std::span<const std::int32_t> labels,
                     std::size_t num_classes, int epoch, const std::optional<LcmBatchInputs>& lcm) {
  ad::Tensor y_t = one_hot_rows(labels, num_classes);
  if (const auto* ls = std::get_if<LabelSmoothing>(&strategy)) {
    check_epsilon(ls->epsilon);
    const double floor = ls->epsilon / static_cast<double>(num_classes);
    for (double& v : y_t.data()) v = v == 1.0 ? (1.0 - ls->epsilon) + floor : floor;
    return tape.constant(std::move(y_t));
  }
  if (!lcm_active(strategy, epoch)) return tape.constant(std::move(y_t));
  if (!lcm) throw ValidationError("target_batch: LCM strategy needs encoder outputs");
  const auto& s = std::get<Lcm>(strategy);
  ad::Var sld = simulated_label_batch(tape.constant(std::move(y_t)), label_confusion_batch(*lcm), s.alpha);
  return s.detach_target ? tape.detach(sld) : sld;
}

}  // namespace lcm::targets
