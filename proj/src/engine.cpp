#include "darklabel/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "darklabel/random.hpp"
#include "darklabel/text.hpp"
#include "darklabel/workbook.hpp"

namespace darklabel {

const char* to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Idle: return "Idle";
    case Phase::DataIndexing: return "DataIndexing";
    case Phase::DataSampling: return "DataSampling";
    case Phase::GeneratingInstructionalPrompt: return "GeneratingInstructionalPrompt";
    case Phase::Annotating: return "Annotating";
    case Phase::Done: return "Done";
    case Phase::Failed: return "Failed";
  }
  return "?";
}

std::string notification_text(const ProgressState& s) {
  switch (s.phase) {
    case Phase::Idle: return "Idle";
    case Phase::DataIndexing: return "Data Indexing";
    case Phase::DataSampling: return "Data Sampling";
    case Phase::GeneratingInstructionalPrompt: return "Generating the Instructional Prompt";
    case Phase::Annotating:
      return "Annotating (" + std::to_string(s.done) + "/" + std::to_string(s.total) + ")";
    case Phase::Done: return "Done";
    case Phase::Failed: return "Failed: " + s.reason;
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string_view line_rest(std::string_view s) {
  const auto nl = s.find('\n');
  return nl == std::string_view::npos ? s : s.substr(0, nl);
}

}  // namespace

ParsedAnswer parse_single_response(std::string_view text, const LabelScale& labels) {
  const auto answer_at = text::ifind(text, "ANSWER");
  const auto search_from = answer_at == std::string_view::npos ? 0 : answer_at;
  const auto label_at = text::ifind(text, "Label:", search_from);

  std::string_view after;
  if (label_at != std::string_view::npos) {
    after = text.substr(label_at + 6);
  } else if (answer_at != std::string_view::npos) {
    after = text.substr(answer_at + 6);
    if (!after.empty() && after.front() == ':') after.remove_prefix(1);
  } else {
    throw Error(ErrorCode::NoAnswerSection, "response has no ANSWER section");
  }

  const auto explanation_at = text::ifind(after, "EXPLANATION");
  std::string_view answer_part =
      explanation_at == std::string_view::npos ? after : after.substr(0, explanation_at);
  answer_part = text::trim(answer_part);

  std::string_view token;
  if (!answer_part.empty() && answer_part.front() == '[') {
    auto inner = answer_part.substr(1);
    const auto close = inner.find(']');
    token = close == std::string_view::npos ? line_rest(inner) : inner.substr(0, close);
  } else {
    token = line_rest(answer_part);
  }
  token = text::trim(token);

  auto canonical = labels.canonical(token);
  if (!canonical) throw Error(ErrorCode::UnknownLabel, "label not in scale", std::string(token));

  ParsedAnswer out{*canonical, {}};
  if (explanation_at != std::string_view::npos) {
    auto rest = after.substr(explanation_at + 11);
    rest = text::trim(rest);
    if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
    out.explanation = std::string(text::trim(rest));
  }
  return out;
}

namespace {

bool is_separator(std::string_view line) {
  line = text::trim(line);
  return line.size() >= 3 && line.find_first_not_of('=') == std::string_view::npos;
}

std::optional<std::size_t> fragment_tag(std::string_view fragment) {
  constexpr std::string_view kTag = "data-instance-";
  const auto at = text::ifind(fragment, kTag);
  if (at == std::string_view::npos) return std::nullopt;
  std::size_t i = at + kTag.size();
  std::size_t value = 0;
  bool any = false;
  while (i < fragment.size() && fragment[i] >= '0' && fragment[i] <= '9') {
    value = value * 10 + static_cast<std::size_t>(fragment[i] - '0');
    any = true;
    ++i;
  }
  if (!any) return std::nullopt;
  return value;
}

}  // namespace

MultiParse parse_multi_response(std::string_view text, std::size_t expected,
                                const LabelScale& labels) {
  std::vector<std::string> fragments;
  std::string current;
  for (const auto& line : text::split_lines(text)) {
    if (is_separator(line)) {
      fragments.push_back(std::move(current));
      current.clear();
      continue;
    }
    current += line;
    current += '\n';
  }
  fragments.push_back(std::move(current));
  std::erase_if(fragments, [](const std::string& f) { return text::trim(f).empty(); });

  MultiParse out;
  std::vector<const std::string*> assigned(expected + 1, nullptr);
  std::vector<const std::string*> untagged;
  for (const auto& f : fragments) {
    const auto tag = fragment_tag(f);
    if (tag) {
      if (*tag >= 1 && *tag <= expected && !assigned[*tag])
        assigned[*tag] = &f;
      else
        ++out.discarded_fragments;
    } else {
      untagged.push_back(&f);
    }
  }
  std::size_t next_untagged = 0;
  for (std::size_t k = 1; k <= expected; ++k) {
    if (!assigned[k] && next_untagged < untagged.size()) assigned[k] = untagged[next_untagged++];
  }
  out.discarded_fragments += untagged.size() - next_untagged;

  for (std::size_t k = 1; k <= expected; ++k) {
    FragmentResult r;
    r.index = k;
    if (!assigned[k]) {
      r.error = Error(ErrorCode::MissingFragment, "no fragment for data-instance-" +
                                                      std::to_string(k));
    } else {
      try {
        r.answer = parse_single_response(*assigned[k], labels);
      } catch (const Error& e) {
        r.error = e;
      }
    }
    out.results.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Retry

std::chrono::milliseconds RetryPolicy::backoff(int attempt, std::uint64_t stream) const {
  const double cap = static_cast<double>(base_delay.count()) * std::pow(factor, attempt);
  SeededRng rng(jitter_seed ^ (stream * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(attempt));
  return std::chrono::milliseconds(static_cast<long long>(rng.unit() * cap));
}

namespace {

bool retryable(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Transport:
    case ErrorCode::RateLimited:
      return true;
    case ErrorCode::ProviderError: {
      auto* pf = dynamic_cast<const ProviderFailure*>(&e);
      return pf && pf->status() >= 500;
    }
    default:
      return false;
  }
}

void pause(const RetryPolicy& policy, std::chrono::milliseconds d) {
  if (d.count() <= 0) return;
  if (policy.sleep)
    policy.sleep(d);
  else
    std::this_thread::sleep_for(d);
}

}  // namespace

GroupOutcome retry_group(Provider& provider, const ChatRequest& request, std::size_t group_size,
                         const LabelScale& labels, int attempt_budget, const RetryPolicy& policy,
                         const CostTable& costs, std::uint64_t stream) {
  if (attempt_budget < 1) throw Error(ErrorCode::InvalidConfig, "attempt budget must be >= 1");
  GroupOutcome out;
  std::optional<std::chrono::milliseconds> retry_after;
  for (int attempt = 0; attempt < attempt_budget; ++attempt) {
    if (attempt > 0) {
      auto delay = policy.backoff(attempt - 1, stream);
      if (retry_after) delay = std::max(delay, *retry_after);
      pause(policy, delay);
    }
    ++out.attempts;
    retry_after.reset();
    Completion c;
    try {
      c = provider.complete(request);
    } catch (const ProviderFailure& e) {
      out.failure = e;
      out.results.clear();
      retry_after = e.retry_after();
      if (!retryable(e)) break;
      continue;
    } catch (const Error& e) {
      out.failure = e;
      out.results.clear();
      break;
    }
    out.failure.reset();
    out.usage += c.usage;
    out.cost += compute_cost(c.usage, request.model, costs);
    out.usage_estimated = out.usage_estimated || c.usage_estimated;

    if (group_size == 1) {
      FragmentResult r;
      r.index = 1;
      try {
        r.answer = parse_single_response(c.text, labels);
      } catch (const Error& e) {
        r.error = e;
      }
      out.results = {std::move(r)};
    } else {
      out.results = parse_multi_response(c.text, group_size, labels).results;
    }
    const bool all_parsed = std::all_of(out.results.begin(), out.results.end(),
                                        [](const FragmentResult& r) { return r.answer.has_value(); });
    if (all_parsed) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotation

BatchOutcome annotate_instances(const PromptBundle& bundle,
                                const std::vector<PromptInstance>& instances, Provider& provider,
                                const AnnotationOptions& options, ProgressTracker* progress) {
  // Group by id in first-appearance order, remembering each instance's slot.
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::string, std::size_t> group_index;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto [it, fresh] = group_index.emplace(instances[i].group_id, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  BatchOutcome out;
  out.results.resize(instances.size());
  std::vector<GroupOutcome> outcomes(groups.size());
  std::atomic<std::size_t> next{0};
  const int budget = 1 + std::max(0, options.max_retries);
  const std::string model = provider.model();

  auto worker = [&] {
    for (;;) {
      const auto g = next.fetch_add(1);
      if (g >= groups.size()) return;
      std::vector<PromptInstance> members;
      for (auto i : groups[g]) members.push_back(instances[i]);
      ChatRequest req = ChatRequest::user(model, compose_annotation_prompt(bundle, members));
      req.temperature = options.temperature;
      req.max_output_tokens = options.max_output_tokens;
      try {
        outcomes[g] = retry_group(provider, req, members.size(), bundle.label_scale, budget,
                                  options.retry, options.costs, g);
      } catch (const Error& e) {
        outcomes[g].failure = e;
      }
      if (progress) progress->advance(members.size());
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, options.max_in_flight));
  const auto n_threads = std::min(workers, groups.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& go = outcomes[g];
    out.usage += go.usage;
    out.cost += go.cost;
    out.requests += static_cast<std::size_t>(go.attempts);
    out.usage_estimated = out.usage_estimated || go.usage_estimated;
    for (std::size_t k = 0; k < groups[g].size(); ++k) {
      const auto slot = groups[g][k];
      const auto& inst = instances[slot];
      AnnotationResult r;
      r.data_id = inst.data_id;
      r.group_id = inst.group_id;
      r.text = inst.text;
      if (go.failure) {
        r.parse_error = std::string(to_string(go.failure->code())) + ": " + go.failure->what();
      } else if (k < go.results.size() && go.results[k].answer) {
        r.llm_label = go.results[k].answer->label;
        r.llm_explanation = go.results[k].answer->explanation;
      } else if (k < go.results.size() && go.results[k].error) {
        const auto& e = *go.results[k].error;
        r.parse_error = std::string(to_string(e.code())) + ": " + e.what();
        if (!e.details().empty()) *r.parse_error += " (" + e.details() + ")";
      } else {
        r.parse_error = "MissingFragment: no result";
      }
      out.results[slot] = std::move(r);
    }
  }
  return out;
}

void check_annotation_preconditions(const Workbook& wb, const Provider& provider,
                                    const AnnotationOptions& options) {
  if (wb.working_sample.empty())
    throw Error(ErrorCode::EmptyWorkingSample, "the working sample is empty");
  if (wb.rulebook.empty()) throw Error(ErrorCode::EmptyRulebook, "the rule book is empty");
  build_instruction_request(wb.context);  // throws MissingAnswer
  if (!options.costs.models.count(provider.model()))
    throw Error(ErrorCode::UnknownModel, "model missing from cost table", provider.model());
  if (options.max_in_flight < 1)
    throw Error(ErrorCode::InvalidConfig, "max_in_flight must be at least 1");
}

InstructionalPrompt obtain_instruction(const Workbook& wb, Provider& provider,
                                       const AnnotationOptions& options, Usage& usage,
                                       double& cost, bool& fresh) {
  const auto digest = context_digest(wb.context);
  if (wb.instruction_cache && wb.instruction_cache->source_context_digest == digest) {
    fresh = false;
    return *wb.instruction_cache;
  }
  fresh = true;
  ChatRequest req = ChatRequest::user(provider.model(), build_instruction_request(wb.context));
  req.temperature = options.temperature;
  const int budget = 1 + std::max(0, options.max_retries);
  std::optional<Error> last;
  for (int attempt = 0; attempt < budget; ++attempt) {
    if (attempt > 0) pause(options.retry, options.retry.backoff(attempt - 1, ~0ULL));
    try {
      auto c = provider.complete(req);
      usage += c.usage;
      cost += compute_cost(c.usage, req.model, options.costs);
      auto instruction = std::string(text::trim(c.text));
      if (instruction.empty()) {
        last = Error(ErrorCode::ProviderError, "empty instructional prompt");
        continue;
      }
      return {std::move(instruction), text::now_iso8601(), digest};
    } catch (const ProviderFailure& e) {
      last = e;
      if (!retryable(e)) break;
    }
  }
  throw *last;
}

AnnotationOutcome run_annotation(const Workbook& snapshot, Provider& provider,
                                 const AnnotationOptions& options, ProgressTracker* progress) {
  try {
    check_annotation_preconditions(snapshot, provider, options);
    AnnotationOutcome out;
    Usage usage;
    double cost = 0.0;
    bool fresh = false;
    if (progress) progress->set_phase(Phase::GeneratingInstructionalPrompt);
    out.instruction = obtain_instruction(snapshot, provider, options, usage, cost, fresh);

    auto& task = out.task;
    task.created_at = text::now_iso8601();
    task.prompt_bundle = snapshot_bundle(snapshot, out.instruction);
    task.show_explanations = options.show_explanations;
    task.model = provider.model();

    std::vector<PromptInstance> instances;
    for (const auto& e : snapshot.working_sample)
      instances.push_back({e.data_id, e.group_id, e.text});
    if (progress) progress->set({Phase::Annotating, 0, instances.size(), {}});
    auto batch = annotate_instances(task.prompt_bundle, instances, provider, options, progress);

    for (std::size_t i = 0; i < batch.results.size(); ++i)
      batch.results[i].keep_flag = snapshot.working_sample[i].keep_pin;
    task.results = std::move(batch.results);
    task.total_usage = usage + batch.usage;
    task.total_cost = cost + batch.cost;
    task.usage_estimated = batch.usage_estimated;
    return out;
  } catch (const Error& e) {
    if (progress) progress->set({Phase::Failed, 0, 0, to_string(e.code())});
    throw;
  }
}

std::int64_t commit_annotation(Workbook& wb, AnnotationOutcome outcome) {
  outcome.task.task_number = wb.next_task_number();
  wb.instruction_cache = std::move(outcome.instruction);
  const auto n = outcome.task.task_number;
  wb.tasks.push_back(std::move(outcome.task));
  return n;
}

std::int64_t start_annotation(Workbook& wb, Provider& provider, const AnnotationOptions& options,
                              ProgressTracker* progress) {
  const auto n = commit_annotation(wb, run_annotation(wb, provider, options, progress));
  if (progress) {
    const auto total = progress->snapshot().total;
    progress->set({Phase::Done, total, total, {}});
  }
  return n;
}

TaskRecord display_view(const TaskRecord& task) {
  TaskRecord view = task;
  if (!task.show_explanations)
    for (auto& r : view.results) r.llm_explanation.reset();
  return view;
}

}  // namespace darklabel
