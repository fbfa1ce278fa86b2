#include "modeconn/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "modeconn/io.hpp"

namespace modeconn {

namespace fs = std::filesystem;

namespace {

// Options shared by every training-shaped subcommand.
struct TrainCli {
  std::string arch = "gcn";
  std::string activation = "relu";
  std::string optimizer = "adam";
  int epochs = 200;
  double lr = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.0;
  std::vector<int> hidden = {64};
  std::string init = "glorot";
  double init_scale = 0.1;
  std::uint64_t init_seed = 0;
  std::uint64_t data_order_seed = 0;
  double minibatch_fraction = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--arch", arch, "gcn | sage_mean | mlp");
    cmd->add_option("--activation", activation, "relu | leaky_relu:a | elu:a");
    cmd->add_option("--optimizer", optimizer, "sgd | adam");
    cmd->add_option("--epochs", epochs);
    cmd->add_option("--lr", lr);
    cmd->add_option("--weight-decay", weight_decay);
    cmd->add_option("--dropout", dropout);
    cmd->add_option("--hidden", hidden, "hidden layer widths")->delimiter(',');
    cmd->add_option("--init", init, "glorot | uniform");
    cmd->add_option("--init-scale", init_scale);
    cmd->add_option("--init-seed", init_seed);
    cmd->add_option("--data-order-seed", data_order_seed);
    cmd->add_option("--minibatch-fraction", minibatch_fraction);
  }

  TrainConfig to_config() const {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.lr = lr;
    cfg.optimizer = optimizer_from_string(optimizer);
    cfg.weight_decay = weight_decay;
    cfg.dropout = dropout;
    cfg.hidden_dims = hidden;
    cfg.activation = activation_from_string(activation);
    cfg.init = init == "uniform" ? InitSpec::uniform(init_scale, init_seed)
                                 : InitSpec::glorot(init_seed);
    cfg.data_order_seed = data_order_seed;
    cfg.minibatch_fraction = minibatch_fraction;
    return cfg;
  }

  std::string config_json(std::uint64_t seed) const {
    JsonWriter w;
    w.begin_object();
    w.field("arch", arch);
    w.field("activation", activation);
    w.field("optimizer", optimizer);
    w.field("epochs", static_cast<std::int64_t>(epochs));
    w.field("lr", lr);
    w.field("weight_decay", weight_decay);
    w.field("dropout", dropout);
    std::string h;
    for (std::size_t i = 0; i < hidden.size(); ++i)
      h += (i ? "," : "") + std::to_string(hidden[i]);
    w.field("hidden", h);
    w.field("init", init);
    w.field("init_scale", init_scale);
    w.field("init_seed", static_cast<std::int64_t>(init_seed));
    w.field("data_order_seed", static_cast<std::int64_t>(data_order_seed));
    w.field("minibatch_fraction", minibatch_fraction);
    w.field("seed", static_cast<std::int64_t>(seed));
    w.end_object();
    return w.str();
  }
};

struct CsbmCli {
  int n = 400;
  int d = 16;
  double p_in = 0.8;
  double p_out = 0.2;
  double sigma = 1.0;
  double mu_gap = 2.0;
  double train_frac = 0.1;
  double test_frac = 0.2;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n, "node count (even)");
    cmd->add_option("--d", d, "feature dimension");
    cmd->add_option("--p-in", p_in);
    cmd->add_option("--p-out", p_out);
    cmd->add_option("--sigma", sigma);
    cmd->add_option("--mu-gap", mu_gap);
    cmd->add_option("--train-frac", train_frac);
    cmd->add_option("--test-frac", test_frac);
  }

  CsbmParams to_params() const {
    CsbmParams p;
    p.n = n;
    p.d = d;
    p.p_in = p_in;
    p.p_out = p_out;
    p.sigma = sigma;
    p.mu_gap = mu_gap;
    p.train_frac = train_frac;
    p.test_frac = test_frac;
    return p;
  }
};

struct BoundsCli {
  double C_L = 0.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double L_ell = std::sqrt(2.0);
  double L_F = 1.0;
  double rho = 0.25;
  double delta_conf = 0.05;

  void attach(CLI::App* cmd) {
    cmd->add_option("--c-l", C_L, "curvature constant C_L");
    cmd->add_option("--c1", C1);
    cmd->add_option("--c2", C2);
    cmd->add_option("--l-ell", L_ell, "loss Lipschitz constant");
    cmd->add_option("--l-f", L_F, "curvature lower-bound constant");
    cmd->add_option("--rho", rho, "iteration exponent in the gen bound");
    cmd->add_option("--delta-conf", delta_conf, "confidence level delta");
  }

  BoundConstants to_constants() const { return {C_L, C1, C2, L_ell, L_F}; }
};

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text_file(out_path, content);
}

// One sweep cell: generate the graph, train the mode pair, fit the Bezier
// control, measure spectra, and evaluate every bound.
struct SweepRow {
  std::string axis;
  double axis_value = 0.0;
  int repeat = 0;
  std::uint64_t cell_seed = 0;
  CsbmParams params;
  DegreeStats deg;
  double delta_expected = 0.0;
  double delta_measured = 0.0;
  double lambda_eff = 0.0;
  BarrierReport linear_train, linear_test, bezier_train, bezier_test;
  ModeMetrics metrics_a, metrics_b;
  BoundReport bounds;
};

SweepRow run_sweep_cell(SweepAxis axis, double value, const CsbmParams& params,
                        int cell_index, int repeat, std::uint64_t seed_base,
                        const TrainConfig& cfg, Arch arch, int bezier_steps,
                        int grid_size, const BoundConstants& constants, double rho,
                        double delta_conf) {
  SweepRow row;
  row.axis = to_string(axis);
  row.axis_value = value;
  row.repeat = repeat;
  row.params = params;
  row.cell_seed = seed_base + static_cast<std::uint64_t>(cell_index) * 1000 +
                  static_cast<std::uint64_t>(repeat);

  GraphDataset g = generate_csbm(params, row.cell_seed);
  NormalizedAdjacency adj = normalize_adjacency(g);
  row.deg = degree_stats(g);
  row.delta_expected = expected_spectrum(params).delta;
  SpectralReport spec = spectral_gap(adj, 2);
  row.delta_measured = spec.delta;
  row.lambda_eff =
      effective_propagation(spec.delta, g.n, row.deg.d_min, constants);

  Mode mode_a = train_mode(g, cfg, arch, row.cell_seed ^ 0xA, "sweep");
  Mode mode_b = train_mode(g, cfg, arch, row.cell_seed ^ 0xB, "sweep");
  row.metrics_a = mode_a.metrics;
  row.metrics_b = mode_b.metrics;

  PathSpec linear = PathSpec::linear(mode_a.params, mode_b.params);
  PathProfile lin_prof = evaluate_path(linear, g, adj, grid_size);
  row.linear_train = loss_barrier(lin_prof, Which::train);
  row.linear_test = loss_barrier(lin_prof, Which::test);

  TrainConfig bez_cfg = cfg;
  bez_cfg.epochs = bezier_steps;
  ModelParams control = train_bezier_control(mode_a.params, mode_b.params, g, adj,
                                             bez_cfg, row.cell_seed ^ 0xC);
  PathSpec bezier = PathSpec::bezier(mode_a.params, mode_b.params, control);
  PathProfile bez_prof = evaluate_path(bezier, g, adj, grid_size);
  row.bezier_train = loss_barrier(bez_prof, Which::train);
  row.bezier_test = loss_barrier(bez_prof, Which::test);

  row.bounds = make_bound_report(mode_a.params, mode_b.params, g, adj, constants,
                                 params, row.linear_train.loss_barrier, cfg.epochs,
                                 rho, delta_conf);
  return row;
}

const char* kSweepHeader =
    "axis,axis_value,repeat,cell_seed,n,p_in,p_out,sigma,homophily,density,"
    "d_min,delta_expected,delta_measured,lambda_eff,"
    "linear_barrier_train,linear_barrier_test,linear_acc_barrier_train,"
    "bezier_barrier_train,bezier_barrier_test,"
    "train_loss_a,test_loss_a,train_acc_a,test_acc_a,gen_gap_a,"
    "train_loss_b,test_loss_b,train_acc_b,test_acc_b,gen_gap_b,"
    "layerwise_barrier_bound,graph_property_bound,csbm_bound,lower_bound,gen_bound";

std::string sweep_row_csv(const SweepRow& r) {
  std::ostringstream o;
  o << r.axis << ',' << format_g17(r.axis_value) << ',' << r.repeat << ','
    << r.cell_seed << ',' << r.params.n << ',' << format_g17(r.params.p_in) << ','
    << format_g17(r.params.p_out) << ',' << format_g17(r.params.sigma) << ','
    << format_g17(r.params.homophily()) << ',' << format_g17(r.params.density())
    << ',' << r.deg.d_min << ',' << format_g17(r.delta_expected) << ','
    << format_g17(r.delta_measured) << ',' << format_g17(r.lambda_eff) << ','
    << format_g17(r.linear_train.loss_barrier) << ','
    << format_g17(r.linear_test.loss_barrier) << ','
    << format_g17(r.linear_train.acc_barrier) << ','
    << format_g17(r.bezier_train.loss_barrier) << ','
    << format_g17(r.bezier_test.loss_barrier) << ','
    << format_g17(r.metrics_a.train_loss) << ',' << format_g17(r.metrics_a.test_loss)
    << ',' << format_g17(r.metrics_a.train_acc) << ','
    << format_g17(r.metrics_a.test_acc) << ','
    << format_g17(r.metrics_a.generalization_gap) << ','
    << format_g17(r.metrics_b.train_loss) << ',' << format_g17(r.metrics_b.test_loss)
    << ',' << format_g17(r.metrics_b.train_acc) << ','
    << format_g17(r.metrics_b.test_acc) << ','
    << format_g17(r.metrics_b.generalization_gap) << ','
    << format_g17(r.bounds.layerwise) << ',' << format_g17(r.bounds.graph_property) << ','
    << format_g17(r.bounds.csbm_clamped) << ',' << format_g17(r.bounds.lower_bound)
    << ',' << format_g17(r.bounds.gen_bound);
  return o.str();
}

int default_jobs() {
  if (const char* env = std::getenv("MODECONN_JOBS")) {
    int j = std::atoi(env);
    if (j > 0) return j;
  }
  return 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"mode-connectivity laboratory for graph neural networks"};
  app.require_subcommand(1);

  // ---- gen-csbm ----
  auto* gen = app.add_subcommand("gen-csbm", "sample a CSBM graph to a directory");
  CsbmCli gen_csbm;
  gen_csbm.attach(gen);
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out, "output directory")->required();

  // ---- train ----
  auto* train = app.add_subcommand("train", "train one mode on a graph directory");
  TrainCli train_cli;
  train_cli.attach(train);
  std::string train_graph, train_out;
  std::uint64_t train_seed = 0;
  train->add_option("--graph", train_graph)->required();
  train->add_option("--seed", train_seed);
  train->add_option("--out", train_out, "checkpoint path")->required();

  // ---- interpolate ----
  auto* interp = app.add_subcommand("interpolate", "linear path profile CSV");
  std::string in_graph, in_a, in_b, in_out;
  int in_grid = 25;
  interp->add_option("--graph", in_graph)->required();
  interp->add_option("--a", in_a)->required();
  interp->add_option("--b", in_b)->required();
  interp->add_option("--grid", in_grid);
  interp->add_option("--out", in_out);

  // ---- bezier ----
  auto* bez = app.add_subcommand("bezier", "fit a Bezier control point and profile");
  TrainCli bez_cli;
  bez_cli.attach(bez);
  std::string bz_graph, bz_a, bz_b, bz_out, bz_control_out;
  int bz_steps = 200, bz_grid = 25;
  std::uint64_t bz_seed = 0;
  bez->add_option("--graph", bz_graph)->required();
  bez->add_option("--a", bz_a)->required();
  bez->add_option("--b", bz_b)->required();
  bez->add_option("--steps", bz_steps, "control-point update steps");
  bez->add_option("--grid", bz_grid);
  bez->add_option("--seed", bz_seed);
  bez->add_option("--out", bz_out, "profile CSV path");
  bez->add_option("--out-control", bz_control_out, "control checkpoint path");

  // ---- barrier ----
  auto* bar = app.add_subcommand("barrier", "loss/accuracy barriers of a path");
  std::string bar_graph, bar_a, bar_b, bar_control, bar_out;
  int bar_grid = 25;
  bar->add_option("--graph", bar_graph)->required();
  bar->add_option("--a", bar_a)->required();
  bar->add_option("--b", bar_b)->required();
  bar->add_option("--control", bar_control, "Bezier control checkpoint (optional)");
  bar->add_option("--grid", bar_grid);
  bar->add_option("--out", bar_out);

  // ---- landscape ----
  auto* land = app.add_subcommand("landscape", "loss plane through three modes");
  std::string ld_graph, ld_a, ld_b, ld_c, ld_out;
  int ld_nx = 25, ld_ny = 25;
  double ld_extent = 1.2;
  land->add_option("--graph", ld_graph)->required();
  land->add_option("--a", ld_a)->required();
  land->add_option("--b", ld_b)->required();
  land->add_option("--c", ld_c)->required();
  land->add_option("--nx", ld_nx);
  land->add_option("--ny", ld_ny);
  land->add_option("--extent", ld_extent);
  land->add_option("--out", ld_out);

  // ---- bounds ----
  auto* bnd = app.add_subcommand("bounds", "evaluate every theoretical bound");
  BoundsCli bnd_cli;
  bnd_cli.attach(bnd);
  std::string bd_graph, bd_a, bd_b, bd_out;
  int bd_grid = 25, bd_T = 200;
  bool bd_csbm = false;
  CsbmCli bd_params;
  bd_params.attach(bnd);
  bnd->add_flag("--csbm", bd_csbm, "graph is CSBM; evaluate the community bound");
  bnd->add_option("--graph", bd_graph)->required();
  bnd->add_option("--a", bd_a)->required();
  bnd->add_option("--b", bd_b)->required();
  bnd->add_option("--grid", bd_grid);
  bnd->add_option("--iterations", bd_T, "training iteration count T");
  bnd->add_option("--out", bd_out);

  // ---- dmc ----
  auto* dmc = app.add_subcommand("dmc", "mode-connectivity distance of two profiles");
  std::string dm_a, dm_b, dm_which = "train", dm_out;
  dmc->add_option("--profile-a", dm_a)->required();
  dmc->add_option("--profile-b", dm_b)->required();
  dmc->add_option("--which", dm_which, "train | test");
  dmc->add_option("--out", dm_out);

  // ---- transfer ----
  auto* tra = app.add_subcommand("transfer", "vanilla source-to-target transfer");
  TrainCli tra_cli;
  tra_cli.attach(tra);
  std::string tr_source, tr_target, tr_out;
  std::uint64_t tr_seed = 0;
  tra->add_option("--source", tr_source)->required();
  tra->add_option("--target", tr_target)->required();
  tra->add_option("--seed", tr_seed);
  tra->add_option("--out", tr_out);

  // ---- sweep ----
  auto* swp = app.add_subcommand("sweep", "mode pairs across a CSBM grid");
  TrainCli swp_train;
  swp_train.attach(swp);
  CsbmCli swp_base;
  swp_base.attach(swp);
  BoundsCli swp_bounds;
  swp_bounds.attach(swp);
  std::string swp_axis = "density", swp_out;
  std::vector<double> swp_values;
  int swp_repeats = 3, swp_bezier_steps = 200, swp_grid = 25;
  int swp_jobs = default_jobs();
  std::uint64_t swp_seed = 0;
  swp->add_option("--axis", swp_axis, "density | homophily | sigma")->required();
  swp->add_option("--values", swp_values, "axis values")->delimiter(',')->required();
  swp->add_option("--repeats", swp_repeats, "seeds per cell");
  swp->add_option("--bezier-steps", swp_bezier_steps);
  swp->add_option("--grid", swp_grid);
  swp->add_option("--jobs", swp_jobs, "parallel cell tasks");
  swp->add_option("--seed-base", swp_seed);
  swp->add_option("--out", swp_out, "output directory")->required();

  // ---- report ----
  auto* rep = app.add_subcommand("report", "correlation summary of a sweep CSV");
  std::string rp_sweep, rp_out, rp_scatter;
  rep->add_option("--sweep", rp_sweep, "sweep.csv path")->required();
  rep->add_option("--out", rp_out);
  rep->add_option("--scatter", rp_scatter, "scatter CSV path (x, y, label)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      CsbmParams p = gen_csbm.to_params();
      GraphDataset g = generate_csbm(p, gen_seed);
      save_graph(gen_out, g);
      JsonWriter w;
      w.begin_object();
      w.field("n", static_cast<std::int64_t>(p.n));
      w.field("d", static_cast<std::int64_t>(p.d));
      w.field("p_in", p.p_in);
      w.field("p_out", p.p_out);
      w.field("sigma", p.sigma);
      w.field("mu_gap", p.mu_gap);
      w.field("train_frac", p.train_frac);
      w.field("test_frac", p.test_frac);
      w.field("seed", static_cast<std::int64_t>(gen_seed));
      w.field("homophily", p.homophily());
      w.field("density", p.density());
      w.field("separability", p.separability());
      w.end_object();
      write_text_file(fs::path(gen_out) / "config.json", w.str() + "\n");
      std::cout << "wrote " << gen_out << " (n=" << g.n
                << ", edges=" << g.edges.size() << ")\n";
    } else if (*train) {
      GraphDataset g = load_graph(train_graph);
      Mode mode = train_mode(g, train_cli.to_config(),
                             arch_from_string(train_cli.arch), train_seed,
                             train_graph);
      save_mode(train_out, mode);
      std::cout << mode_metrics_json(mode);
    } else if (*interp) {
      GraphDataset g = load_graph(in_graph);
      NormalizedAdjacency adj = normalize_adjacency(g);
      PathSpec spec = PathSpec::linear(load_mode(in_a).params, load_mode(in_b).params);
      emit(in_out, profile_csv(evaluate_path(spec, g, adj, in_grid)));
    } else if (*bez) {
      GraphDataset g = load_graph(bz_graph);
      NormalizedAdjacency adj = normalize_adjacency(g);
      ModelParams a = load_mode(bz_a).params;
      ModelParams b = load_mode(bz_b).params;
      TrainConfig cfg = bez_cli.to_config();
      cfg.epochs = bz_steps;
      ModelParams control = train_bezier_control(a, b, g, adj, cfg, bz_seed);
      if (!bz_control_out.empty()) {
        Mode m;
        m.params = control;
        m.provenance.graph_id = bz_graph;
        save_mode(bz_control_out, m);
      }
      PathSpec spec = PathSpec::bezier(a, b, control);
      emit(bz_out, profile_csv(evaluate_path(spec, g, adj, bz_grid)));
    } else if (*bar) {
      GraphDataset g = load_graph(bar_graph);
      NormalizedAdjacency adj = normalize_adjacency(g);
      ModelParams a = load_mode(bar_a).params;
      ModelParams b = load_mode(bar_b).params;
      PathSpec spec =
          bar_control.empty()
              ? PathSpec::linear(a, b)
              : PathSpec::bezier(a, b, load_mode(bar_control).params);
      PathProfile prof = evaluate_path(spec, g, adj, bar_grid);
      std::string json = barrier_report_json(loss_barrier(prof, Which::train),
                                             loss_barrier(prof, Which::test));
      emit(bar_out, json);
      if (!bar_out.empty()) std::cout << json;
    } else if (*land) {
      GraphDataset g = load_graph(ld_graph);
      NormalizedAdjacency adj = normalize_adjacency(g);
      LandscapeGrid grid =
          landscape_plane(load_mode(ld_a).params, load_mode(ld_b).params,
                          load_mode(ld_c).params, g, adj, ld_nx, ld_ny, ld_extent);
      emit(ld_out, landscape_csv(grid));
    } else if (*bnd) {
      GraphDataset g = load_graph(bd_graph);
      NormalizedAdjacency adj = normalize_adjacency(g);
      Mode a = load_mode(bd_a);
      Mode b = load_mode(bd_b);
      PathProfile prof = evaluate_path(PathSpec::linear(a.params, b.params), g,
                                       adj, bd_grid);
      double barrier = loss_barrier(prof, Which::train).loss_barrier;
      std::optional<CsbmParams> csbm;
      if (bd_csbm) csbm = bd_params.to_params();
      int T = a.provenance.epochs_run > 0 ? a.provenance.epochs_run : bd_T;
      BoundReport report =
          make_bound_report(a.params, b.params, g, adj, bnd_cli.to_constants(),
                            csbm, barrier, T, bnd_cli.rho, bnd_cli.delta_conf);
      emit(bd_out, bound_report_json(report));
    } else if (*dmc) {
      PathProfile pa = parse_profile_csv(read_text_file(dm_a));
      PathProfile pb = parse_profile_csv(read_text_file(dm_b));
      Which which = dm_which == "test" ? Which::test : Which::train;
      JsonWriter w;
      w.begin_object();
      w.field("d_mc", mode_connectivity_distance(pa, pb, which));
      w.field("which", dm_which);
      w.end_object();
      emit(dm_out, w.str() + "\n");
    } else if (*tra) {
      GraphDataset source = load_graph(tr_source);
      GraphDataset target = load_graph(tr_target);
      DomainPairReport report =
          vanilla_transfer(source, target, tra_cli.to_config(), tr_seed,
                           arch_from_string(tra_cli.arch));
      emit(tr_out, domain_pair_json(report));
    } else if (*swp) {
      auto started = std::chrono::steady_clock::now();
      SweepAxis axis = sweep_axis_from_string(swp_axis);
      std::vector<CsbmParams> grid = sweep_grid(axis, swp_values, swp_base.to_params());
      TrainConfig cfg = swp_train.to_config();
      Arch arch = arch_from_string(swp_train.arch);
      BoundConstants constants = swp_bounds.to_constants();

      struct Task {
        int cell;
        int repeat;
      };
      std::vector<Task> tasks;
      for (int c = 0; c < static_cast<int>(grid.size()); ++c)
        for (int r = 0; r < swp_repeats; ++r) tasks.push_back({c, r});

      std::vector<SweepRow> rows(tasks.size());
      std::vector<std::string> status(tasks.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) break;
          try {
            rows[i] = run_sweep_cell(axis, swp_values[tasks[i].cell],
                                     grid[tasks[i].cell], tasks[i].cell,
                                     tasks[i].repeat, swp_seed, cfg, arch,
                                     swp_bezier_steps, swp_grid, constants,
                                     swp_bounds.rho, swp_bounds.delta_conf);
            status[i] = "ok";
          } catch (const Error& e) {
            status[i] = std::string(errc_name(e.code())) + ": " + e.what();
          }
        }
      };
      int jobs = std::max(1, swp_jobs);
      std::vector<std::thread> pool;
      for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      fs::create_directories(swp_out);
      std::ostringstream csv;
      csv << "# units: loss=nats, accuracy=fraction in [0,1]\n"
          << kSweepHeader << '\n';
      bool any_failed = false;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (status[i] == "ok")
          csv << sweep_row_csv(rows[i]) << '\n';
        else
          any_failed = true;
      }
      fs::path csv_path = fs::path(swp_out) / "sweep.csv";
      write_text_file(csv_path, csv.str());

      RunManifest manifest;
      std::string config = "{\"axis\": \"" + swp_axis + "\", \"train\": " +
                           swp_train.config_json(swp_seed) + "}";
      manifest.resolved_config = config;
      char run_id[20];
      std::snprintf(run_id, sizeof(run_id), "%016llx",
                    static_cast<unsigned long long>(
                        fnv1a64(config.data(), config.size())));
      manifest.run_id = run_id;
      manifest.outputs.push_back(csv_path.string());
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        manifest.per_seed_status["cell" + std::to_string(tasks[i].cell) + "_rep" +
                                 std::to_string(tasks[i].repeat)] = status[i];
      }
      manifest.wall_ms =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - started)
              .count();
      write_text_file(fs::path(swp_out) / "manifest.json", manifest.to_json());
      std::cout << "wrote " << csv_path.string() << " (" << tasks.size()
                << " rows)\n";
      if (any_failed) {
        std::cerr << "some sweep cells failed; see manifest.json\n";
        return 1;
      }
    } else if (*rep) {
      auto rows = read_csv_rows(rp_sweep);
      if (rows.size() < 3)
        fail(Errc::invalid_params, "report needs at least 3 sweep rows");
      std::vector<double> axis_vals, lin_barriers, acc_barriers, gen_gaps, val_accs;
      for (const auto& r : rows) {
        axis_vals.push_back(std::stod(r.at("axis_value")));
        lin_barriers.push_back(std::stod(r.at("linear_barrier_train")));
        // One (barrier, gap, proxy) point per trained pair; metrics are
        // averaged over the two modes.
        acc_barriers.push_back(std::stod(r.at("linear_acc_barrier_train")));
        gen_gaps.push_back(0.5 * (std::stod(r.at("gen_gap_a")) +
                                  std::stod(r.at("gen_gap_b"))));
        val_accs.push_back(0.5 * (std::stod(r.at("test_acc_a")) +
                                  std::stod(r.at("test_acc_b"))));
      }
      CorrelationReport axis_corr = correlations(axis_vals, lin_barriers);
      CorrelationReport barrier_corr = correlations(acc_barriers, gen_gaps);
      CorrelationReport proxy_corr = correlations(val_accs, gen_gaps);
      std::string json = "{\"barrier_vs_axis\": " +
                         correlation_report_json(axis_corr);
      json.pop_back();  // strip newline
      json += ", \"acc_barrier_vs_gen_gap\": " +
              correlation_report_json(barrier_corr);
      json.pop_back();
      json += ", \"val_acc_vs_gen_gap\": " + correlation_report_json(proxy_corr);
      json.pop_back();
      json += "}\n";
      emit(rp_out, json);
      if (!rp_scatter.empty()) {
        std::string scatter = scatter_csv(acc_barriers, gen_gaps, "acc_barrier");
        // Append the proxy series under its own label, one file, tidy rows.
        std::istringstream more(scatter_csv(val_accs, gen_gaps, "val_acc"));
        std::string line;
        int skip = 2;  // comment + header already present
        while (std::getline(more, line))
          if (skip > 0) --skip; else scatter += line + "\n";
        write_text_file(rp_scatter, scatter);
      }
    }
  } catch (const Error& e) {
    JsonWriter w;
    w.begin_object();
    w.field("error", errc_name(e.code()));
    w.field("code", static_cast<std::int64_t>(static_cast<int>(e.code())));
    w.field("message", e.what());
    if (e.index >= 0) w.field("index", static_cast<std::int64_t>(e.index));
    w.end_object();
    std::cerr << w.str() << "\n";
    return 10 + static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "{\"error\": \"internal\", \"message\": \"" << e.what() << "\"}\n";
    return 9;
  }
  return 0;
}

int run_command(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args);
}

}  // namespace modeconn
