#include "problem_factory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "srba/problems/dataset.hpp"
#include "srba/problems/hyperparam.hpp"
#include "srba/verifier.hpp"

namespace srba::bench {

namespace {

Dataset load_dataset(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    return load_csv(path);
  }
  return load_libsvm(path);
}

}  // namespace

BuiltProblem build_problem(const ProblemSpec& spec) {
  BuiltProblem built;
  if (spec.kind == "quadratic") {
    auto qp = std::make_shared<QuadraticBilevel>(
        make_quadratic(spec.seed, spec.p, spec.d, spec.n, spec.m, spec.mu_min,
                       spec.l_max));
    built.quadratic = qp;
    built.problem = qp;
  } else if (spec.kind == "hyperparam") {
    Dataset train, val;
    if (!spec.train_path.empty()) {
      train = load_dataset(spec.train_path);
      val = load_dataset(spec.val_path);
    } else {
      // one distribution, split into train and validation
      const Dataset all =
          make_gaussian_binary(spec.seed, spec.n_train + spec.n_val,
                               spec.features, spec.separation);
      std::tie(train, val) = split_dataset(all, spec.n_train);
    }
    built.problem = make_hyperparam_problem(std::move(train), std::move(val));
  } else if (spec.kind == "datacleaning") {
    Dataset train, val;
    if (!spec.train_path.empty()) {
      train = load_dataset(spec.train_path);
      val = load_dataset(spec.val_path);
    } else {
      const Dataset all =
          make_gaussian_blobs(spec.seed, spec.n_train + spec.n_val,
                              spec.features, spec.classes, spec.separation);
      std::tie(train, val) = split_dataset(all, spec.n_train);
    }
    DataCleaningInstance inst =
        make_datacleaning(std::move(train), std::move(val), spec.p_c,
                          spec.regularizer, spec.seed + 2);
    built.problem = inst.problem;
    built.corruption_mask = std::move(inst.corruption_mask);
  } else if (spec.kind == "worstcase") {
    double delta = spec.delta;
    if (!(delta > 0.0)) {
      // derive the initial gap from the target chain length
      const double c = spec.c_override > 0.0 ? spec.c_override
                                             : estimate_gamma_smoothness();
      const double alpha = std::min(1.0, static_cast<double>(spec.m) / c);
      delta = 1760.0 * spec.m * spec.eps * spec.chain /
              (spec.L1F * std::sqrt(alpha));
    }
    built.worstcase =
        make_worstcase(spec.m, spec.n, spec.eps, delta, spec.L1F, spec.muG,
                       spec.seed, spec.c_override);
    built.problem = built.worstcase->problem;
  } else {
    throw std::runtime_error("unknown problem kind '" + spec.kind + "'");
  }
  return built;
}

Monitor make_monitor(const BuiltProblem& built, int h_every,
                     int fd_grad_every) {
  if (built.quadratic) {
    auto qp = built.quadratic;
    return [qp](int, int, const JointState& u, TraceRecord& row) {
      row.h = qp->h(u.x);
      row.grad_h_sq = qp->grad_h(u.x).squaredNorm();
    };
  }
  if (built.worstcase) {
    // the instance is small; copy it into the closure
    auto inst = std::make_shared<WorstCaseInstance>(*built.worstcase);
    return [inst](int, int, const JointState& u, TraceRecord& row) {
      row.h = inst->h(u.x);
      row.grad_h_sq = inst->grad_h(u.x).squaredNorm();
    };
  }

  // Data problems: periodic evaluation at outer resets only, warm-starting
  // the inner solve from the previous evaluation.
  auto pb = built.problem;
  auto warm = std::make_shared<Vector>();
  return [pb, warm, h_every, fd_grad_every](int t, int k, const JointState& u,
                                            TraceRecord& row) {
    if (k != 0) return;
    const double tol = 1e-8;
    if (h_every > 0 && t % h_every == 0) {
      const Vector* ws = warm->size() == pb->inner_dim() ? warm.get() : nullptr;
      const Vector z = solve_inner(*pb, u.x, tol, ws);
      *warm = z;
      row.h = full_value_F(*pb, z, u.x);
    }
    if (fd_grad_every > 0 && t % fd_grad_every == 0) {
      row.grad_h_sq = fd_hypergradient(*pb, u.x, 1e-4, 1e-10).squaredNorm();
    }
  };
}

}  // namespace srba::bench
