#include "sgdg2/runner.hpp"

#include <cmath>

#include "sgdg2/error.hpp"

namespace sgdg2 {

RunResult run_optimizer(const RunConfig& config, const StochasticObjective& objective,
                        ParamVector x0, EpochSchedule& schedule, const RunHooks& hooks) {
  if (schedule.sample_count() != objective.sample_count()) {
    throw Error(ErrorCode::invalid_argument, "schedule and objective sample counts differ");
  }
  if (static_cast<std::size_t>(x0.size()) != objective.dimension()) {
    throw Error(ErrorCode::dimension_mismatch, "initial point has the wrong dimension");
  }

  RunResult result;
  result.final_state = OptimizerState::initial(config.h0, config.beta);
  result.final_params = std::move(x0);

  const std::uint64_t per_epoch = schedule.batches_per_epoch();
  std::uint64_t total = per_epoch * config.epochs;
  if (config.max_iterations > 0 && config.max_iterations < total) total = config.max_iterations;

  OptimizerState& state = result.final_state;
  ParamVector& x = result.final_params;
  while (state.iteration < total) {
    const MiniBatch batch = schedule.next_batch();
    RunRow row;
    try {
      if (config.optimizer == OptimizerKind::sgd_g2) {
        SgdG2Step step = sgdg2_step(state, objective, x, batch, config.critical_tolerance);
        x = std::move(step.x_next);
        state = step.state;
        row.minibatch_loss = step.report.loss;
        row.p = step.report.p;
        row.h_opt = step.report.h_opt;
        row.branch = step.report.branch;
      } else {
        SgdStep step = plain_sgd_step(state, objective, x, batch);
        x = std::move(step.x_next);
        state = step.state;
        row.minibatch_loss = step.loss;
      }
    } catch (const Error& error) {
      if (error.code() != ErrorCode::numeric_overflow) throw;
      result.status = RunStatus::diverged;
      result.diverged_at = state.iteration + 1;
      result.message = error.what();
      return result;
    }

    row.iteration = state.iteration;
    row.grad_evals = state.grad_evals;
    row.epoch = schedule.epoch();
    row.h = state.h;

    const bool epoch_end = state.iteration % per_epoch == 0;
    const bool due = config.eval_every > 0 ? state.iteration % config.eval_every == 0 : epoch_end;
    if (hooks.evaluate && (due || state.iteration == total)) {
      bool finite = true;
      try {
        row.evaluation = hooks.evaluate(x);
        finite = !row.evaluation.train_loss || std::isfinite(*row.evaluation.train_loss);
      } catch (const Error& error) {
        if (error.code() != ErrorCode::numeric_overflow) throw;
        finite = false;
      }
      if (!finite) {
        result.record.rows.push_back(row);
        if (hooks.on_row) hooks.on_row(row);
        result.status = RunStatus::diverged;
        result.diverged_at = state.iteration;
        result.message = "non-finite training loss";
        return result;
      }
    }
    result.record.rows.push_back(row);
    if (hooks.on_row) hooks.on_row(row);
  }
  return result;
}

}  // namespace sgdg2
