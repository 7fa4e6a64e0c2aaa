#include "slu/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slu/error.hpp"
#include "slu/io.hpp"

namespace slu {

using nlohmann::json;

namespace {

json vocab_json(const SubwordVocab& v) {
  return {{"kind", v.kind() == VocabKind::kBpeStyle ? "bpe" : "wordpiece"}, {"unk", v.unk()}, {"pieces", v.pieces()}};
}

SubwordVocab vocab_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "bpe" && kind != "wordpiece") throw ParseError("checkpoint vocabulary kind '" + kind + "'");
  return SubwordVocab(kind == "bpe" ? VocabKind::kBpeStyle : VocabKind::kWordpieceStyle,
                      j.at("pieces").get<std::vector<std::string>>(), j.at("unk").get<std::string>());
}

ParamBlock block_from_name(const std::string& name) {
  for (auto b : {ParamBlock::kAsr, ParamBlock::kNluEncoder, ParamBlock::kIcHead, ParamBlock::kSlHead})
    if (name == param_block_name(b)) return b;
  throw ParseError("unknown parameter block '" + name + "'");
}

}  // namespace

std::string serialize_model(const ToyModel& model) {
  const auto& c = model.config;
  json j;
  j["format"] = "slu-toy-model";
  j["version"] = kCheckpointVersion;
  j["config"] = {{"asr_hidden", c.asr_hidden},
                 {"nlu_hidden", c.nlu_hidden},
                 {"nlu_max_positions", c.nlu_max_positions},
                 {"subsample_stride", c.subsample_stride},
                 {"slot_head", slot_head_name(c.slot_head)},
                 {"label_smoothing", c.label_smoothing},
                 {"stop_gradient_at_asr", c.stop_gradient_at_asr},
                 {"frontend",
                  {{"frame_ms", c.frontend.frame_ms},
                   {"hop_ms", c.frontend.hop_ms},
                   {"num_bands", c.frontend.num_bands},
                   {"fft_size", c.frontend.fft_size}}}};
  j["asr_vocab"] = vocab_json(model.asr_vocab);
  j["nlu_vocab"] = vocab_json(model.nlu_vocab);
  j["tags"] = model.tags;
  j["intents"] = model.intents;
  json params = json::array();
  for (const auto& p : model.params.all()) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(p.value.size()));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r)
      for (Eigen::Index col = 0; col < p.value.cols(); ++col) data.push_back(p.value(r, col));
    params.push_back({{"name", p.name},
                      {"block", param_block_name(p.block)},
                      {"rows", p.value.rows()},
                      {"cols", p.value.cols()},
                      {"data", std::move(data)}});
  }
  j["params"] = std::move(params);
  return j.dump();
}

ToyModel deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "slu-toy-model") throw ParseError("not a toy model checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw ParseError("unsupported checkpoint version " + j.at("version").dump());
    const auto& jc = j.at("config");
    ToyModelConfig c;
    c.asr_hidden = jc.at("asr_hidden").get<int>();
    c.nlu_hidden = jc.at("nlu_hidden").get<int>();
    c.nlu_max_positions = jc.at("nlu_max_positions").get<int>();
    c.subsample_stride = jc.at("subsample_stride").get<int>();
    c.slot_head = parse_slot_head(jc.at("slot_head").get<std::string>());
    c.label_smoothing = jc.at("label_smoothing").get<double>();
    c.stop_gradient_at_asr = jc.at("stop_gradient_at_asr").get<bool>();
    const auto& jf = jc.at("frontend");
    c.frontend.frame_ms = jf.at("frame_ms").get<double>();
    c.frontend.hop_ms = jf.at("hop_ms").get<double>();
    c.frontend.num_bands = jf.at("num_bands").get<int>();
    c.frontend.fft_size = jf.at("fft_size").get<int>();

    ToyModel model{c,
                   vocab_from_json(j.at("asr_vocab")),
                   vocab_from_json(j.at("nlu_vocab")),
                   j.at("tags").get<std::vector<std::string>>(),
                   j.at("intents").get<std::vector<std::string>>(),
                   {}};
    for (const auto& jp : j.at("params")) {
      const auto rows = jp.at("rows").get<Eigen::Index>();
      const auto cols = jp.at("cols").get<Eigen::Index>();
      const auto data = jp.at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw ParseError("parameter " + jp.at("name").get<std::string>() + " has the wrong number of values");
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index col = 0; col < cols; ++col) m(r, col) = data[static_cast<std::size_t>(r * cols + col)];
      model.params.add(jp.at("name").get<std::string>(), block_from_name(jp.at("block").get<std::string>()),
                       std::move(m));
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_model(const ToyModel& model, const std::filesystem::path& path) { atomic_write(path, serialize_model(model)); }

ToyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace slu
