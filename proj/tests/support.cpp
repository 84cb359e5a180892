#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "darklabel/csv.hpp"
#include "darklabel/digest.hpp"
#include "darklabel/ops.hpp"
#include "darklabel/prompt.hpp"
#include "darklabel/text.hpp"

namespace fs = std::filesystem;
using namespace darklabel;

namespace dltest {

std::string fixture_path(const std::string& rel) { return std::string(DARKLABEL_FIXTURES_DIR) + "/" + rel; }

std::string read_fixture(const std::string& rel) { return csv::read_file(fixture_path(rel)); }

const std::vector<std::string>& labels() {
  static const std::vector<std::string> l = sentiment_scale().labels();
  return l;
}

const std::vector<LabelRule>& base_rules() {
  static const std::vector<LabelRule> rules = {
      {"Extremely Negative", "Expresses fear, anger or despair about the situation.", 1},
      {"Negative", "Complains about a problem or an inconvenience.", 1},
      {"Neutral", "States a fact without an evident attitude.", 1},
      {"Positive", "Expresses satisfaction or mild approval.", 1},
      {"Extremely Positive", "Expresses strong joy, gratitude or enthusiasm.", 1},
  };
  return rules;
}

LabelRule refund_rule() { return {"Negative", "Mentions a refund problem: contains(\"refund\")", 2}; }

const std::vector<std::pair<std::string, std::string>>& promoted_shots() {
  static const std::vector<std::pair<std::string, std::string>> shots = {
      {"Delivery delayed yet again this month", "Negative"},
      {"Train to work cancelled this morning", "Negative"},
      {"Just got the vaccine at the town hall", "Positive"},
  };
  return shots;
}

const std::vector<std::string>& context_answers() {
  static const std::vector<std::string> answers = {
      "Understand public sentiment about shopping during the pandemic.",
      "Train a sentiment classifier.",
      "Tweets posted during the early months of the pandemic.",
      "Each instance is a tweet.",
      "Some tweets are sarcastic.",
  };
  return answers;
}

Workbook fixture_workbook() {
  auto wb = create_workbook("fixture", sentiment_scale());
  import_dataset(wb, parse_dataset_csv(read_fixture("dataset.csv")));
  index_data_ids(wb);
  const QuestionId ids[] = {QuestionId::Q1, QuestionId::Q2, QuestionId::Q3, QuestionId::Q4, QuestionId::Q5};
  for (int i = 0; i < 5; ++i) set_context_answer(wb, ids[i], context_answers()[static_cast<std::size_t>(i)]);
  for (const auto& r : base_rules()) upsert_rule(wb, r.label, r.rule_text, r.position);
  return wb;
}

PromptBundle base_bundle() {
  PromptBundle b;
  b.instructional = {"Label the sentiment of each tweet.", "2024-01-01T00:00:00.000Z", "fixture"};
  b.rules_snapshot = base_rules();
  b.label_scale = sentiment_scale();
  return b;
}

AnnotationOptions quiet_options() {
  AnnotationOptions o;
  o.retry.sleep = [](std::chrono::milliseconds) {};
  return o;
}

TempDir::TempDir() {
  std::random_device rd;
  for (;;) {
    auto candidate = fs::temp_directory_path() / ("darklabel-test-" + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::str(const std::string& child) const {
  return child.empty() ? path_.string() : (path_ / child).string();
}

Completion ScriptedProvider::complete(const ChatRequest& request) {
  int call;
  {
    std::lock_guard lock(mu_);
    call = calls_++;
    prompts_.push_back(request.last_user_content());
  }
  return script_(request, call);
}

int ScriptedProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::vector<std::string> ScriptedProvider::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

namespace {

std::string random_text(std::mt19937_64& rng, bool allow_empty = false) {
  static const std::vector<std::string> pieces = {
      "refund", "great", ",", "\"quoted\"", "line\nbreak", "café", "日本語", " ", "=====",
      "Label:", "ANSWER", "'", "\\", "\t", "emoji 😀", "x"};
  std::uniform_int_distribution<int> len(allow_empty ? 0 : 1, 6);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) out += pieces[pick(rng)];
  return out;
}

template <typename T>
std::optional<T> maybe(std::mt19937_64& rng, T value) {
  return rng() % 2 ? std::optional<T>(std::move(value)) : std::nullopt;
}

}  // namespace

Workbook random_workbook(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nlabels(2, 6);
  std::vector<std::string> scale_labels;
  const int k = nlabels(rng);
  for (int i = 0; i < k; ++i) scale_labels.push_back("L" + std::to_string(i) + random_text(rng));
  auto wb = create_workbook(random_text(rng), LabelScale(scale_labels));
  auto label = [&] { return scale_labels[rng() % scale_labels.size()]; };

  const int rows = static_cast<int>(rng() % 12);
  const bool indexed = rng() % 2;
  for (int i = 0; i < rows; ++i) {
    DatasetRow r;
    if (indexed) r.data_id = i + 1;
    r.group_id = "g" + std::to_string(rng() % 4);
    r.text = random_text(rng);
    const int extras = static_cast<int>(rng() % 3);
    for (int e = 0; e < extras; ++e) r.extras.emplace_back("col" + std::to_string(e), random_text(rng, true));
    wb.dataset.push_back(std::move(r));
  }
  for (auto& c : wb.context)
    if (c.question_id != QuestionId::Q6_TASK_TYPE) c.answer = random_text(rng, true);
  const int rules = static_cast<int>(rng() % 6);
  for (int i = 0; i < rules; ++i) wb.rulebook.push_back({label(), random_text(rng), i});
  const int shots = static_cast<int>(rng() % 5);
  for (int i = 0; i < shots; ++i) {
    Shot s{random_text(rng) + std::to_string(i), label(), {}};
    if (rng() % 2) s.source = ShotSource::promoted(static_cast<std::int64_t>(rng() % 5 + 1), i + 1);
    wb.shots.push_back(std::move(s));
  }
  for (int i = 0; i < static_cast<int>(rng() % 5); ++i)
    wb.working_sample.push_back({i + 1, "g" + std::to_string(i), random_text(rng), rng() % 2 == 0});
  const int tasks = static_cast<int>(rng() % 3);
  for (int t = 0; t < tasks; ++t) {
    TaskRecord task;
    task.task_number = t + 1;
    task.created_at = text::now_iso8601();
    task.prompt_bundle.instructional = {random_text(rng), task.created_at, sha256_hex(random_text(rng))};
    task.prompt_bundle.rules_snapshot = wb.rulebook;
    task.prompt_bundle.shots_snapshot = wb.shots;
    task.prompt_bundle.label_scale = wb.label_scale;
    task.show_explanations = rng() % 2;
    task.model = "mock-lexicon-v1";
    task.usage_estimated = rng() % 2;
    task.total_usage = {static_cast<std::int64_t>(rng() % 10000), static_cast<std::int64_t>(rng() % 1000)};
    task.total_cost = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    for (int i = 0; i < static_cast<int>(rng() % 6); ++i) {
      AnnotationResult r;
      r.data_id = i + 1;
      r.group_id = "g" + std::to_string(i % 2);
      r.text = random_text(rng);
      r.llm_label = maybe(rng, label());
      r.llm_explanation = maybe(rng, random_text(rng, true));
      r.parse_error = r.llm_label ? std::nullopt : maybe(rng, std::string("NoAnswerSection: x"));
      r.human_label = maybe(rng, label());
      r.agree = rng() % 2;
      r.gold_shot_flag = rng() % 2;
      r.keep_flag = rng() % 2;
      task.results.push_back(std::move(r));
    }
    wb.tasks.push_back(std::move(task));
  }
  if (rng() % 2)
    wb.instruction_cache = InstructionalPrompt{random_text(rng), text::now_iso8601(), sha256_hex("c")};
  return wb;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

}  // namespace

std::pair<int, std::string> run_darklabel(const std::vector<std::string>& args, std::string* err) {
  TempDir io;
  std::string cmd = shell_quote(DARKLABEL_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " >" + shell_quote(io.str("out")) + " 2>" + shell_quote(io.str("err"));
  const int raw = std::system(cmd.c_str());
  const int status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  if (err) *err = csv::read_file(io.str("err"));
  return {status, csv::read_file(io.str("out"))};
}

std::string sha256_file(const std::string& path) { return sha256_hex(csv::read_file(path)); }

}  // namespace dltest
