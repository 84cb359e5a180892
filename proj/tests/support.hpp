#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "darklabel/engine.hpp"
#include "darklabel/llm.hpp"
#include "darklabel/types.hpp"
#include "darklabel/workbook.hpp"

namespace dltest {

std::string fixture_path(const std::string& rel);
std::string read_fixture(const std::string& rel);

/// Labels for the sentiment scale, lowest first.
const std::vector<std::string>& labels();

/// One descriptive rule per label; none carries a `contains` directive.
const std::vector<darklabel::LabelRule>& base_rules();
/// `contains("refund")` rule for Negative.
darklabel::LabelRule refund_rule();
/// The three dataset rows validated as gold shots in the fixture loop.
const std::vector<std::pair<std::string, std::string>>& promoted_shots();
/// Answers for Q1..Q5.
const std::vector<std::string>& context_answers();

/// Workbook with the dataset fixture imported and indexed, context answered
/// and the base rules installed. The working sample is empty.
darklabel::Workbook fixture_workbook();

/// Bundle with the base rules and no shots.
darklabel::PromptBundle base_bundle();

/// Annotation options that never sleep.
darklabel::AnnotationOptions quiet_options();

/// Deletes the directory on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = {}) const;

 private:
  std::filesystem::path path_;
};

/// Provider answering through a callback; counts calls.
class ScriptedProvider : public darklabel::Provider {
 public:
  using Script = std::function<darklabel::Completion(const darklabel::ChatRequest&, int call)>;
  explicit ScriptedProvider(Script script, std::string model = "mock-lexicon-v1")
      : script_(std::move(script)), model_(std::move(model)) {}

  darklabel::Completion complete(const darklabel::ChatRequest& request) override;
  std::string model() const override { return model_; }
  int calls() const;
  std::vector<std::string> prompts() const;

 private:
  Script script_;
  std::string model_;
  mutable std::mutex mu_;
  int calls_ = 0;
  std::vector<std::string> prompts_;
};

/// Random but structurally valid workbook.
darklabel::Workbook random_workbook(std::mt19937_64& rng);

/// Runs the darklabel executable with `args`; returns (exit status, stdout).
/// stderr is captured into `err` when given.
std::pair<int, std::string> run_darklabel(const std::vector<std::string>& args,
                                          std::string* err = nullptr);

std::string sha256_file(const std::string& path);

}  // namespace dltest
