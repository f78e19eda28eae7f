// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <kgqa/eval.hpp>
#include <kgqa/graph.hpp>

#include <filesystem>
#include <string>

namespace testing {

std::filesystem::path fixture(const std::string& relative);
std::string slurp(const std::filesystem::path& path);

/// The shared fixture graph, loaded once.
const kgqa::KnowledgeGraph& fixture_graph();

kgqa::DatasetItem worked_item(const std::string& qid);

/// Fresh empty directory under the build tree.
std::filesystem::path scratch_dir(const std::string& name);

} // namespace testing
