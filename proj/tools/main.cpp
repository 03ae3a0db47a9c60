// alsel: batch selection for active learning from exported model outputs.
//
// Subcommands mirror the library pipeline: variance and embedding
// construction produce tensor files, select/select-initial produce index
// files, simulate runs the synthetic active-learning loop. All randomness is
// controlled by --seed; identical inputs and flags give byte-identical
// outputs.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "alsel/embeddings.hpp"
#include "alsel/io.hpp"
#include "alsel/sampling.hpp"
#include "alsel/simulation.hpp"
#include "alsel/strategies.hpp"

namespace {

struct SelectOptions {
  std::string strategy;
  std::size_t budget = 1;
  std::uint64_t seed = 0;
  std::string temperature = "0.5";
  std::string labeled_path;
  std::string activations_path;
  std::string predictions_path;
  std::string embeddings_path;
  std::size_t pool_size = 0;
  bool no_labeled_seed = false;
  std::string out_path;
};

[[noreturn]] void missing_input(const std::string& strategy, const std::string& flag) {
  throw alsel::ValidationError(alsel::ValidationIssue::MissingInput,
                               "strategy " + strategy + " requires " + flag);
}

int run_select(const SelectOptions& options) {
  const alsel::Strategy strategy = alsel::strategy_from_name(options.strategy);

  alsel::StrategyConfig config;
  config.strategy = strategy;
  config.temperature = alsel::Temperature::parse(options.temperature);
  config.budget = options.budget;
  config.seed = options.seed;
  config.seed_with_labeled = !options.no_labeled_seed;

  std::optional<alsel::EmbeddingMatrix> activations;
  std::optional<alsel::PredictionTensor> predictions;
  std::optional<alsel::EmbeddingMatrix> embeddings;
  if (!options.activations_path.empty()) {
    activations = alsel::read_matrix(options.activations_path);
  }
  if (!options.predictions_path.empty()) {
    // Entropy and gradient embeddings are defined for a single forward pass;
    // variance-based strategies re-check K >= 2 themselves.
    predictions = alsel::read_prediction_tensor(options.predictions_path, 1);
  }
  if (!options.embeddings_path.empty()) {
    embeddings = alsel::read_matrix(options.embeddings_path);
  }
  alsel::IndexSet labeled;
  if (!options.labeled_path.empty()) {
    labeled = alsel::read_index_set(options.labeled_path);
  }

  // Enforce the per-strategy input matrix with flag names in the message.
  const alsel::RequiredInputs required = alsel::required_inputs(strategy);
  const bool precomputed_consistency =
      strategy == alsel::Strategy::ConsistencyEmbedding && embeddings.has_value();
  if (required.activations && !activations && !precomputed_consistency) {
    missing_input(options.strategy, "--activations");
  }
  if (required.predictions && !predictions && !precomputed_consistency) {
    missing_input(options.strategy, "--predictions");
  }
  if (required.ssl_embeddings && !embeddings) {
    missing_input(options.strategy, "--embeddings");
  }

  alsel::SelectionDiagnostics diagnostics;
  alsel::IndexSet picked;
  if (precomputed_consistency) {
    // Pipeline mode: consistency embeddings were built by embed-consistency,
    // so run the diversity sampler on them directly.
    alsel::validate(*embeddings);
    alsel::validate(labeled, embeddings->n_samples());
    picked = alsel::select_batch(*embeddings, labeled, config.budget, config.temperature,
                                 config.seed, &diagnostics);
  } else {
    alsel::QueryInputs inputs;
    if (activations) inputs.activations = &*activations;
    if (predictions) inputs.predictions = &*predictions;
    if (embeddings) inputs.ssl_embeddings = &*embeddings;
    inputs.labeled = labeled;
    inputs.config = config;
    inputs.pool_size = options.pool_size;
    picked = alsel::query(inputs, &diagnostics);
  }

  if (diagnostics.degenerate_uniform_draws > 0) {
    std::cerr << "warning: " << diagnostics.degenerate_uniform_draws
              << " draw(s) hit an all-zero distance vector; fell back to uniform selection\n";
  }
  alsel::write_index_set(picked, options.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch selection strategies for active learning"};
  app.require_subcommand(1);

  // variance
  std::string var_predictions, var_out;
  CLI::App* variance = app.add_subcommand(
      "variance", "Class-wise prediction variances from a prediction tensor");
  variance->add_option("--predictions", var_predictions, "N x K x C tensor file")->required();
  variance->add_option("--out", var_out, "output N x C tensor file")->required();

  // embed-consistency
  std::string cons_activations, cons_predictions, cons_out;
  CLI::App* embed_consistency = app.add_subcommand(
      "embed-consistency", "Consistency embeddings: activations scaled by summed variance");
  embed_consistency->add_option("--activations", cons_activations, "N x d tensor file")
      ->required();
  embed_consistency->add_option("--predictions", cons_predictions, "N x K x C tensor file")
      ->required();
  embed_consistency->add_option("--out", cons_out, "output N x d tensor file")->required();

  // embed-badge
  std::string badge_activations, badge_predictions, badge_out;
  CLI::App* embed_badge = app.add_subcommand(
      "embed-badge", "Cross-entropy gradient embeddings from activations and predictions");
  embed_badge->add_option("--activations", badge_activations, "N x d tensor file")->required();
  embed_badge->add_option("--predictions", badge_predictions, "N x K x C tensor file")
      ->required();
  embed_badge->add_option("--out", badge_out, "output N x (d*C) tensor file")->required();

  // select
  SelectOptions select_options;
  CLI::App* select = app.add_subcommand("select", "Select a labeling batch with a strategy");
  select
      ->add_option("--strategy", select_options.strategy,
                   "random | max-entropy | coreset | badge | consistency-topk | "
                   "consistency-embedding | initial-diversity")
      ->required();
  select->add_option("--budget", select_options.budget, "number of samples to select")
      ->required();
  select->add_option("--seed", select_options.seed, "RNG seed")->required();
  select->add_option("--temperature", select_options.temperature,
                     "positive number or 'greedy' (default 0.5)");
  select->add_option("--labeled", select_options.labeled_path,
                     "index file of already-labeled samples");
  select->add_option("--activations", select_options.activations_path, "N x d tensor file");
  select->add_option("--predictions", select_options.predictions_path, "N x K x C tensor file");
  select->add_option("--embeddings", select_options.embeddings_path,
                     "N x d tensor file (ssl embeddings, or precomputed consistency "
                     "embeddings for consistency-embedding)");
  select->add_option("--pool-size", select_options.pool_size,
                     "pool size when no tensor input is given (random strategy)");
  select->add_flag("--no-labeled-seed", select_options.no_labeled_seed,
                   "consistency-embedding: do not seed the selection with labeled rows");
  select->add_option("--out", select_options.out_path, "output index file")->required();

  // select-initial
  std::string init_embeddings, init_out;
  std::size_t init_budget = 1;
  std::uint64_t init_seed = 0;
  CLI::App* select_initial = app.add_subcommand(
      "select-initial", "Initial dataset selection on self-supervised embeddings (T = 0.5)");
  select_initial->add_option("--embeddings", init_embeddings, "N x d tensor file")->required();
  select_initial->add_option("--budget", init_budget, "number of samples to select")->required();
  select_initial->add_option("--seed", init_seed, "RNG seed")->required();
  select_initial->add_option("--out", init_out, "output index file")->required();

  // simulate
  std::string sim_config_path, sim_out;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run the synthetic active-learning experiment loop");
  simulate->add_option("--config", sim_config_path, "simulation config JSON")->required();
  simulate->add_option("--out", sim_out, "output report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    std::cerr << "error: cli: " << e.what() << "\n";
    return 2;
  }

  try {
    if (variance->parsed()) {
      const alsel::PredictionTensor predictions = alsel::read_prediction_tensor(var_predictions);
      alsel::write_tensor(alsel::classwise_variance(predictions), var_out);
    } else if (embed_consistency->parsed()) {
      const alsel::EmbeddingMatrix activations = alsel::read_matrix(cons_activations);
      const alsel::PredictionTensor predictions = alsel::read_prediction_tensor(cons_predictions);
      const alsel::ConsistencyEmbedding embedding =
          alsel::consistency_embedding(activations, alsel::classwise_variance(predictions));
      alsel::write_tensor(embedding.base, cons_out);
    } else if (embed_badge->parsed()) {
      const alsel::EmbeddingMatrix activations = alsel::read_matrix(badge_activations);
      const alsel::PredictionTensor predictions =
          alsel::read_prediction_tensor(badge_predictions, 1);
      alsel::write_tensor(
          alsel::badge_gradient_embedding(activations, alsel::mean_probabilities(predictions)),
          badge_out);
    } else if (select->parsed()) {
      return run_select(select_options);
    } else if (select_initial->parsed()) {
      const alsel::EmbeddingMatrix embeddings = alsel::read_matrix(init_embeddings);
      alsel::write_index_set(alsel::initial_select(embeddings, init_budget, init_seed), init_out);
    } else if (simulate->parsed()) {
      const alsel::SimConfig config = alsel::load_sim_config(sim_config_path);
      alsel::write_report(alsel::run_experiment(config), sim_out);
    }
  } catch (const alsel::ValidationError& e) {
    std::cerr << "error: " << alsel::to_string(e.issue()) << ": " << e.what() << "\n";
    return 1;
  } catch (const alsel::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
