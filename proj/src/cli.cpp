#include "darklabel/cli.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "darklabel/csv.hpp"
#include "darklabel/error.hpp"
#include "darklabel/ops.hpp"
#include "darklabel/service.hpp"
#include "darklabel/text.hpp"

namespace darklabel {

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

bool parse_bool(const std::string& v, const char* what) {
  const auto s = text::to_lower(v);
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  throw Error(ErrorCode::BadRequest, "expected true or false", what);
}

ProviderKind provider_kind(const std::string& name) {
  if (name == "mock") return ProviderKind::Mock;
  if (name == "live") return ProviderKind::Live;
  throw Error(ErrorCode::InvalidConfig, "provider must be mock or live", name);
}

/// Parsed command line plus the action selected by the subcommand.
struct Cli {
  std::string workbook = env_or("DARKLABEL_WORKBOOK", "");
  std::string provider = env_or("DARKLABEL_PROVIDER", "mock");
  std::string lexicon;
  std::string costs;
  int concurrency = 4;
  std::uint64_t seed = 0;

  std::string op;
  Json params = Json::object();
  std::string out_file;        // CSV artifact destination
  std::string csv_field;       // result field written to out_file / stdout
  std::function<int(std::ostream&, std::ostream&)> custom;  // non-op commands

  // option storage
  std::string s1, s2;
  std::optional<std::string> o1, o2, o3, o4, o5;
  std::int64_t i1 = 0, i2 = 0;
  std::optional<std::int64_t> oi;
  double d1 = 0.3;
  bool f1 = false;
  std::vector<std::int64_t> tasks;

  ServerConfig server;
};

CLI::App* command(CLI::App& parent, const std::string& name, const std::string& help, Cli& cli,
                  const std::string& op) {
  auto* sub = parent.add_subcommand(name, help);
  sub->parse_complete_callback([&cli, op] { cli.op = op; });
  return sub;
}

void build(CLI::App& app, Cli& cli) {
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("-w,--workbook", cli.workbook, "Workbook directory (env DARKLABEL_WORKBOOK)");
  app.add_option("--provider", cli.provider, "mock or live (env DARKLABEL_PROVIDER)");
  app.add_option("--lexicon", cli.lexicon, "Mock provider word lists (JSON)");
  app.add_option("--costs", cli.costs, "Cost table (JSON)");
  app.add_option("--concurrency", cli.concurrency, "Concurrent provider requests")->check(CLI::PositiveNumber);
  app.add_option("--seed", cli.seed, "Default seed");

  auto* init = command(app, "init", "Create a workbook", cli, "workbook.create");
  init->add_option("--name", cli.o1, "Workbook name (default: directory name)");
  init->add_option("--labels", cli.o2, "Comma-separated label scale, low to high");
  init->final_callback([&cli] {
    if (cli.o1) cli.params["name"] = *cli.o1;
    if (cli.o2) {
      std::vector<std::string> labels;
      std::string cur;
      for (char c : *cli.o2 + ",") {
        if (c == ',') {
          labels.emplace_back(text::trim(cur));
          cur.clear();
        } else {
          cur += c;
        }
      }
      cli.params["labels"] = labels;
    }
  });

  command(app, "show", "Print the workbook document", cli, "workbook.get");

  auto* import = command(app, "import", "Import dataset rows from CSV (group_id,text,...)", cli,
                         "dataset.import");
  import->add_option("file", cli.s1, "CSV file")->required();
  import->final_callback([&cli] { cli.params["csv"] = csv::read_file(cli.s1); });

  command(app, "index", "Assign data ids", cli, "dataset.index");

  auto* context = app.add_subcommand("context", "Task context answers");
  context->require_subcommand(1);
  command(*context, "show", "Print the task context", cli, "context.get");
  auto* ctx_set = command(*context, "set", "Answer context questions", cli, "context.put");
  std::optional<std::string>* answers[5] = {&cli.o1, &cli.o2, &cli.o3, &cli.o4, &cli.o5};
  for (int i = 0; i < 5; ++i)
    ctx_set->add_option("--q" + std::to_string(i + 1), *answers[i],
                        "Answer to Q" + std::to_string(i + 1));
  ctx_set->final_callback([&cli, answers] {
    Json a = Json::object();
    for (int i = 0; i < 5; ++i)
      if (*answers[i]) a["Q" + std::to_string(i + 1)] = **answers[i];
    cli.params["answers"] = a;
  });

  auto* rules = app.add_subcommand("rules", "Rule book");
  rules->require_subcommand(1);
  command(*rules, "show", "Print the rule book", cli, "rules.get");
  auto* rule_set = command(*rules, "set", "Add or replace a rule", cli, "rules.put");
  rule_set->add_option("--label", cli.s1)->required();
  rule_set->add_option("--position", cli.i1)->required();
  rule_set->add_option("--text", cli.s2)->required();
  rule_set->final_callback([&cli] {
    cli.params = {{"label", cli.s1}, {"position", cli.i1}, {"rule_text", cli.s2}};
  });
  auto* rule_rm = command(*rules, "remove", "Remove a rule", cli, "rules.remove");
  rule_rm->add_option("--label", cli.s1)->required();
  rule_rm->add_option("--position", cli.i1)->required();
  rule_rm->final_callback([&cli] { cli.params = {{"label", cli.s1}, {"position", cli.i1}}; });

  auto* shots = app.add_subcommand("shots", "Shots");
  shots->require_subcommand(1);
  command(*shots, "show", "Print the shots", cli, "shots.get");
  auto* shot_add = command(*shots, "add", "Add a shot", cli, "shots.add");
  shot_add->add_option("--text", cli.s1)->required();
  shot_add->add_option("--label", cli.s2)->required();
  shot_add->final_callback([&cli] { cli.params = {{"text", cli.s1}, {"gold_label", cli.s2}}; });

  auto* sample = app.add_subcommand("sample", "Working data sample");
  sample->require_subcommand(1);
  command(*sample, "show", "Print the working sample", cli, "sample.get");
  auto* random = command(*sample, "random", "Draw n random groups", cli, "sample.random");
  random->add_option("--n", cli.i1, "Number of groups")->required();
  random->add_option("--seed", cli.oi, "Seed");
  random->final_callback([&cli] {
    cli.params = {{"n", cli.i1}, {"seed", cli.oi ? static_cast<std::uint64_t>(*cli.oi) : cli.seed}};
  });
  auto* seq = command(*sample, "seq", "Take an inclusive range of groups", cli, "sample.sequential");
  seq->add_option("--from", cli.s1)->required();
  seq->add_option("--to", cli.s2)->required();
  seq->final_callback([&cli] { cli.params = {{"from", cli.s1}, {"to", cli.s2}}; });
  command(*sample, "clear", "Empty the working sample", cli, "sample.clear");
  auto* pin = command(*sample, "pin", "Pin (keep) an instance across resampling", cli, "sample.pin");
  pin->add_option("--id", cli.i1, "Data id")->required();
  pin->add_flag("--unpin", cli.f1, "Remove the pin instead");
  pin->final_callback([&cli] { cli.params = {{"data_id", cli.i1}, {"pinned", !cli.f1}}; });

  auto* annotate = command(app, "annotate", "Run an annotation task on the working sample", cli, "annotate");
  annotate->add_option("--explanations", cli.o1, "on or off (default on)");
  annotate->add_option("--max-retries", cli.oi, "Re-issues per group after a failure");
  annotate->final_callback([&cli] {
    if (cli.o1) cli.params["show_explanations"] = parse_bool(*cli.o1, "--explanations");
    if (cli.oi) cli.params["max_retries"] = *cli.oi;
  });

  command(app, "progress", "Print the progress of the latest annotation task", cli, "progress");

  auto* tasks = app.add_subcommand("tasks", "Task records");
  tasks->require_subcommand(1);
  command(*tasks, "list", "Print the dashboard", cli, "tasks.list");
  auto* task_show = command(*tasks, "show", "Print one task", cli, "tasks.get");
  task_show->add_option("--task", cli.i1)->required();
  task_show->final_callback([&cli] { cli.params = {{"task_number", cli.i1}}; });

  auto* exp = command(app, "export", "Write a task's results as CSV", cli, "tasks.export");
  exp->add_option("--task", cli.i1)->required();
  exp->add_option("--out", cli.out_file, "Output file (default stdout)");
  exp->final_callback([&cli] {
    cli.params = {{"task_number", cli.i1}};
    cli.csv_field = "csv";
  });

  auto* validate = command(app, "validate", "Record validation for task results", cli, "tasks.validate");
  validate->add_option("--task", cli.i1)->required();
  validate->add_option("--id", cli.oi, "Data id");
  validate->add_option("--label", cli.o1, "Human label (empty clears)");
  validate->add_option("--agree", cli.o2, "true or false");
  validate->add_option("--gold-shot", cli.o3, "true or false");
  validate->add_option("--keep", cli.o4, "true or false");
  validate->add_option("--csv", cli.o5, "CSV with data_id and any of human_label,agree,gold_shot,keep");
  validate->final_callback([&cli] {
    cli.params = {{"task_number", cli.i1}};
    if (cli.o5) {
      cli.params["csv"] = csv::read_file(*cli.o5);
      return;
    }
    if (!cli.oi) throw Error(ErrorCode::BadRequest, "validate needs --id or --csv");
    cli.params["data_id"] = *cli.oi;
    if (cli.o1) cli.params["human_label"] = *cli.o1;
    if (cli.o2) cli.params["agree"] = parse_bool(*cli.o2, "--agree");
    if (cli.o3) cli.params["gold_shot"] = parse_bool(*cli.o3, "--gold-shot");
    if (cli.o4) cli.params["keep"] = parse_bool(*cli.o4, "--keep");
  });

  auto* promote = command(app, "promote", "Promote a task's gold-shot rows to shots", cli, "tasks.promote");
  promote->add_option("--task", cli.i1)->required();
  promote->final_callback([&cli] { cli.params = {{"task_number", cli.i1}}; });

  auto* eval = app.add_subcommand("eval", "Evaluation reports");
  eval->require_subcommand(1);
  auto* session = command(*eval, "session", "Replay task prompts over a gold set", cli, "evaluate.session");
  session->add_option("--gold", cli.s1, "Gold CSV (text,gold_label)")->required();
  session->add_flag("--bundles-from-tasks", cli.f1, "Use every task's prompt (default)");
  session->add_option("--tasks", cli.tasks, "Task numbers to replay instead of all");
  session->add_option("--out", cli.out_file, "Report CSV");
  session->final_callback([&cli] {
    cli.params = {{"gold_csv", csv::read_file(cli.s1)}};
    if (!cli.tasks.empty()) cli.params["task_numbers"] = cli.tasks;
    cli.csv_field = "report_csv";
  });
  auto* rule_eval = command(*eval, "rules", "Rule-book similarity between consecutive tasks", cli,
                            "evaluate.rules");
  rule_eval->add_option("--tasks", cli.tasks, "Task numbers to compare instead of all");
  rule_eval->add_option("--out", cli.out_file, "Report CSV");
  rule_eval->final_callback([&cli] {
    if (!cli.tasks.empty()) cli.params["task_numbers"] = cli.tasks;
    cli.csv_field = "report_csv";
  });
  auto* eval_show = command(*eval, "show", "Print a stored evaluation", cli, "evaluations.get");
  eval_show->add_option("--k", cli.i1, "Evaluation number")->required();
  eval_show->final_callback([&cli] { cli.params = {{"k", cli.i1}}; });

  auto* optimize = command(app, "optimize", "Bootstrap few-shot demos from validated examples", cli,
                           "optimize");
  optimize->add_option("--max-demos", cli.i1, "Demos per candidate set")->default_val(4);
  optimize->add_option("--candidates", cli.i2, "Random candidate sets")->default_val(8);
  optimize->add_option("--dev", cli.d1, "Dev fraction")->default_val(0.3);
  optimize->add_option("--seed", cli.oi, "Seed");
  optimize->add_flag("--apply", cli.f1, "Install the chosen demos as shots");
  optimize->add_option("--gold", cli.o1, "Gold CSV for a before/after comparison");
  optimize->add_option("--out", cli.out_file, "Report CSV");
  optimize->final_callback([&cli] {
    cli.params = {{"max_demos", cli.i1},
                  {"candidates", cli.i2},
                  {"dev", cli.d1},
                  {"seed", cli.oi ? static_cast<std::uint64_t>(*cli.oi) : cli.seed},
                  {"apply", cli.f1}};
    if (cli.o1) cli.params["gold_csv"] = csv::read_file(*cli.o1);
    cli.csv_field = "report_csv";
  });

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--state", cli.server.state_dir, "State directory")->default_val("darklabel-state");
  serve->add_option("--bind", cli.server.bind_address, "Bind address")->default_val("127.0.0.1");
  serve->add_option("--port", cli.server.port, "Port")->default_val(8080);
  serve->callback([&cli] {
    cli.custom = [&cli](std::ostream&, std::ostream&) {
      cli.server.provider = provider_kind(cli.provider);
      cli.server.lexicon_path = cli.lexicon;
      cli.server.cost_table_path = cli.costs;
      cli.server.concurrency = cli.concurrency;
      cli.server.seed = cli.seed;
      cli.server.auth_token = env_or("DARKLABEL_SERVICE_TOKEN", "");
      Service service(cli.server);
      service.run();
      return 0;
    };
  });
}

bool needs_provider(const std::string& op) {
  return op == "annotate" || op == "evaluate.session" || op == "optimize";
}

void collect_paths(const CLI::App& app, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto* sub : app.get_subcommands({})) {
    const auto path = prefix.empty() ? sub->get_name() : prefix + " " + sub->get_name();
    if (sub->get_subcommands({}).empty())
      out.push_back(path);
    else
      collect_paths(*sub, path, out);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Cli cli;
  CLI::App app("Human-in-the-loop LLM labeling workbench", "darklabel");
  try {
    build(app, cli);
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err);
    }
    if (cli.custom) return cli.custom(out, err);

    if (cli.workbook.empty())
      throw Error(ErrorCode::InvalidConfig, "no workbook directory; pass -w DIR or set DARKLABEL_WORKBOOK");
    OpEnv env;
    env.actor = "cli";
    env.default_seed = cli.seed;
    env.annotation.max_in_flight = cli.concurrency;
    env.annotation.costs = cli.costs.empty() ? CostTable::defaults() : CostTable::load(cli.costs);
    if (needs_provider(cli.op)) env.provider = make_provider(provider_kind(cli.provider), cli.lexicon);

    const auto result = execute_op(cli.op, WorkbookDir(cli.workbook), cli.params, env);
    if (!cli.csv_field.empty()) {
      const auto csv_text = result.at(cli.csv_field).get<std::string>();
      if (!cli.out_file.empty()) {
        csv::write_file(cli.out_file, csv_text);
      } else if (cli.op == "tasks.export") {
        out << csv_text;
        return 0;
      }
    }
    out << result.dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what();
    if (!e.details().empty()) err << " [" << e.details() << "]";
    err << '\n';
    return 1;
  } catch (const CLI::Error& e) {
    return app.exit(e, out, err);
  }
}

std::vector<std::string> cli_command_paths() {
  Cli cli;
  CLI::App app("", "darklabel");
  build(app, cli);
  std::vector<std::string> out;
  collect_paths(app, "", out);
  return out;
}

}  // namespace darklabel
