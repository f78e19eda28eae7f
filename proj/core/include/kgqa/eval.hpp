// SPDX-License-Identifier: Apache-2.0
//
// Datasets, prediction scoring (exact match and answer F1), zero-shot
// partitioning and run reports.
#pragma once

#include "kgqa/agent.hpp"
#include "kgqa/graph.hpp"
#include "kgqa/sexpr.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace kgqa {

class SparqlEndpoint;

enum class Source { GrailQA, GraphQ, WebQSP, Fixture };
enum class Split { Train, Dev, Test };

std::string_view to_string(Source source) noexcept;
std::string_view to_string(Split split) noexcept;
/// Throw InvalidArgument on unknown names.
Source parse_source(std::string_view text);
Split parse_split(std::string_view text);

struct DatasetItem {
    std::string qid;
    std::string question;
    Expr gold;
    std::vector<LinkedEntity> entities;
    Source source = Source::Fixture;
    Split split = Split::Test;
    /// Reference answers shipped with the item; used when no KG is configured.
    std::optional<EntitySet> answers;
};

/// Fields qid, question, sexpression, entities ([{mid, label}] or [[mid, label]]),
/// and optional source, split, answers. Throws ParseError.
[[nodiscard]] DatasetItem dataset_item_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json to_json(const DatasetItem& item);

/// One record per line. Blank lines are skipped. Throws IoError, or ParseError
/// carrying the line number for malformed records, Ref-bearing gold forms and
/// duplicate qids.
[[nodiscard]] std::vector<DatasetItem> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const std::vector<DatasetItem>& items);

/// Converters from the official release layouts. Records without a usable
/// logical form are skipped and counted in `skipped`.
struct ConversionResult {
    std::vector<DatasetItem> items;
    std::size_t skipped = 0;
};
/// GrailQA and GraphQ: an array of {qid, question, s_expression, graph_query.nodes}.
[[nodiscard]] ConversionResult convert_grailqa_style(const nlohmann::json& doc, Source source, Split split);
/// WebQSP: {"Questions": [{QuestionId, RawQuestion, Parses: [{SExpr, TopicEntityMid, TopicEntityName}]}]}.
[[nodiscard]] ConversionResult convert_webqsp(const nlohmann::json& doc, Split split);

[[nodiscard]] bool exact_match(const Expr& pred, const Expr& gold);
/// Both empty -> 1, exactly one empty -> 0.
[[nodiscard]] double answer_f1(const EntitySet& pred, const EntitySet& gold);

enum class ZeroShotReading {
    AtLeastOne, // some relation or class of the gold form is unseen in training
    Strict,     // every relation and class of the gold form is unseen
};
[[nodiscard]] std::vector<DatasetItem> zero_shot_filter(const std::vector<DatasetItem>& test,
                                                        const std::vector<DatasetItem>& train,
                                                        ZeroShotReading reading = ZeroShotReading::AtLeastOne);

struct Prediction {
    std::string qid;
    std::optional<Expr> expr; // nullopt: the run produced no form
    std::optional<EntitySet> answers;
    std::string outcome;      // agent outcome, "completed" when absent and a form is present
};

/// One record per line: {qid, sexpression | null, answers?, outcome?}. An
/// unparsable sexpression counts as a failed prediction.
[[nodiscard]] std::vector<Prediction> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions);

/// Answer set of a Ref-free form; throws on evaluation failure.
using Executor = std::function<EntitySet(const Expr&)>;
[[nodiscard]] Executor graph_executor(const KnowledgeGraph& graph);
[[nodiscard]] Executor endpoint_executor(const SparqlEndpoint& endpoint, const SchemaView& schema);

struct ItemScore {
    std::string qid;
    Source source = Source::Fixture;
    bool em = false;
    double f1 = 0.0;
    std::string outcome;
    std::optional<std::string> note;
};

struct Aggregate {
    std::size_t n = 0;
    double em = 0.0; // percent
    double f1 = 0.0; // percent
};

struct EvalReport {
    std::vector<ItemScore> items; // dataset order
    Aggregate overall;
    std::map<std::string, Aggregate> by_source;
    std::optional<std::size_t> zero_shot_items;

    [[nodiscard]] nlohmann::json to_json() const;
    /// Per-source rows followed by the overall row and an "em X f1 Y" line.
    [[nodiscard]] std::string table() const;
};

/// Scores every dataset item; items without a prediction count as failures.
/// `executor` may be empty, in which case shipped answers are used. Throws
/// UnknownQid listing every prediction qid absent from the dataset.
[[nodiscard]] EvalReport evaluate_run(const std::vector<Prediction>& predictions,
                                      const std::vector<DatasetItem>& dataset, const Executor& executor,
                                      std::size_t jobs = 1);

} // namespace kgqa
