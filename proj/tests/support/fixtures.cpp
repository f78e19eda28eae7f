// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace testing {

std::filesystem::path fixture(const std::string& relative) { return std::filesystem::path(KGQA_FIXTURES_DIR) / relative; }

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

const kgqa::KnowledgeGraph& fixture_graph()
{
    static const kgqa::KnowledgeGraph graph =
        kgqa::load_graph(fixture("kg/triples.tsv"), fixture("kg/schema.json"));
    return graph;
}

kgqa::DatasetItem worked_item(const std::string& qid)
{
    for (auto& item : kgqa::load_dataset(fixture("datasets/worked.jsonl")))
        if (item.qid == qid)
            return item;
    throw std::runtime_error("no fixture item " + qid);
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::path(KGQA_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
