// Python surface: text normalization and scoring, the loss/posterior
// primitives on plain lists, and a Pipeline wrapping vocab + tokenizer +
// model for end-to-end prediction.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "jointqa/checkpoint.hpp"
#include "jointqa/features.hpp"
#include "jointqa/metrics.hpp"
#include "jointqa/model.hpp"
#include "jointqa/objectives.hpp"
#include "jointqa/posterior.hpp"
#include "jointqa/squad.hpp"
#include "jointqa/tokenizer.hpp"
#include "jointqa/vocab.hpp"

namespace py = pybind11;
using namespace jointqa;

namespace {

PosteriorValues make_pv(const std::vector<double>& answer, const std::vector<double>& start,
                        const std::vector<double>& end) {
  if (answer.size() != 2) throw std::invalid_argument("answer must have exactly 2 entries");
  PosteriorValues pv;
  pv.answer = {answer[0], answer[1]};
  pv.start = start;
  pv.end = end;
  return pv;
}

GoldLabel make_gold(int answerable, int start, int end) {
  GoldLabel g;
  g.answerable = answerable;
  g.start = start;
  g.end = end;
  return g;
}

class Pipeline {
 public:
  Pipeline(const std::string& pieces_path, const std::string& chars_path, ModelConfig cfg)
      : pieces_(PieceVocab::load(pieces_path)),
        chars_(CharVocab::load(chars_path)),
        tok_(&pieces_, &chars_),
        model_(std::move(cfg), static_cast<Eigen::Index>(pieces_.size()),
               static_cast<Eigen::Index>(chars_.size())) {}

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  void load(const std::string& checkpoint_path) {
    load_checkpoint(checkpoint_path, model_.params());
  }

  py::list tokenize(const std::string& text) const {
    py::list out;
    for (const Piece& p : tok_.tokenize(text)) {
      py::dict d;
      d["text"] = p.text;
      d["piece_id"] = p.piece_id;
      d["is_continuation"] = p.is_continuation;
      d["byte_begin"] = p.byte_begin;
      d["byte_end"] = p.byte_end;
      out.append(d);
    }
    return out;
  }

  py::dict posterior(const std::string& question, const std::string& context) const {
    Feature f = featurize_pair(question, context);
    Graph<float> g;
    ModelOutput<float> out = model_.forward(g, f);
    PosteriorValues pv = posterior_values(out.joint, out.real_len);
    py::dict d;
    d["answer"] = pv.answer;
    d["start"] = pv.start;
    d["end"] = pv.end;
    return d;
  }

  std::string predict(const std::string& question, const std::string& context) const {
    Feature f = featurize_pair(question, context);
    Graph<float> g;
    ModelOutput<float> out = model_.forward(g, f);
    Prediction pred = decode(posterior_values(out.joint, out.real_len));
    if (!pred.answerable) return "";
    return span_text(context, f.context, pred.start, pred.end);
  }

  const ModelConfig& config() const { return model_.config(); }

 private:
  Feature featurize_pair(const std::string& question, const std::string& context) const {
    Example ex;
    ex.id = "adhoc";
    ex.question = question;
    ex.context = context;
    ex.is_impossible = true;  // supervision is irrelevant for inference
    return featurize_example(ex, tok_, FeaturizeOptions{});
  }

  PieceVocab pieces_;
  CharVocab chars_;
  Tokenizer tok_;
  Model<float> model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "joint answerability and span scoring over dual-granularity encodings";

  m.def("normalize_text", &normalize_text, py::arg("text"),
        "lowercase, strip ASCII punctuation, drop a/an/the, collapse whitespace");

  m.def(
      "f1_em",
      [](const std::string& prediction, const std::string& gold) {
        PairScore s = f1_em(prediction, gold);
        return py::make_tuple(s.f1, s.em);
      },
      py::arg("prediction"), py::arg("gold"),
      "token-overlap F1 and exact match for one prediction/gold pair");

  m.def(
      "evaluate",
      [](const std::map<std::string, std::string>& predictions,
         const std::map<std::string, std::vector<std::string>>& golds) {
        EvalReport r = evaluate(predictions, golds);
        py::dict d;
        d["f1"] = r.f1;
        d["em"] = r.em;
        d["avna"] = r.avna;
        d["total"] = r.total;
        return d;
      },
      py::arg("predictions"), py::arg("golds"),
      "aggregate F1/EM/answerability percentages over a gold set");

  m.def("avna", &avna, py::arg("pred_answerable"), py::arg("gold_answerable"),
        "answer-vs-no-answer agreement percentage");

  m.def("partial_uniform", &partial_uniform, py::arg("length"),
        "uniform no-answer target over invalid spans (start > end)");

  m.def(
      "loss1",
      [](const std::vector<double>& answer, const std::vector<double>& start,
         const std::vector<double>& end, int answerable, int gold_start, int gold_end,
         bool single_answer_term) {
        return loss1(make_pv(answer, start, end), make_gold(answerable, gold_start, gold_end),
                     single_answer_term);
      },
      py::arg("answer"), py::arg("start"), py::arg("end"), py::arg("answerable"),
      py::arg("gold_start") = 0, py::arg("gold_end") = 0, py::arg("single_answer_term") = false,
      "negative log joint at the gold configuration");

  m.def(
      "loss2",
      [](const std::vector<double>& answer, const std::vector<double>& start,
         const std::vector<double>& end, int answerable, int gold_start, int gold_end) {
        return loss2(make_pv(answer, start, end), make_gold(answerable, gold_start, gold_end));
      },
      py::arg("answer"), py::arg("start"), py::arg("end"), py::arg("answerable"),
      py::arg("gold_start") = 0, py::arg("gold_end") = 0,
      "answerable branch of loss1, divergence-to-target no-answer branch");

  m.def(
      "lower_region_kl",
      [](const std::vector<double>& start, const std::vector<double>& end) {
        PosteriorValues pv = make_pv({0.5, 0.5}, start, end);
        return lower_region_kl(pv);
      },
      py::arg("start"), py::arg("end"),
      "divergence from the invalid-span target to the factorized posterior");

  m.def(
      "constrained_max",
      [](double coef, const std::vector<double>& start, const std::vector<double>& end,
         bool upper) {
        SpanScore s = constrained_max(coef, start, end, upper);
        py::dict d;
        d["value"] = s.value;
        d["log_value"] = s.log_value;
        d["has_witness"] = s.has_witness;
        d["i"] = s.i;
        d["j"] = s.j;
        return d;
      },
      py::arg("coef"), py::arg("start"), py::arg("end"), py::arg("upper") = true,
      "best coef*start[i]*end[j] over valid (i <= j) or invalid (i > j) spans");

  m.def(
      "decode",
      [](const std::vector<double>& answer, const std::vector<double>& start,
         const std::vector<double>& end) {
        Prediction p = decode(make_pv(answer, start, end));
        py::dict d;
        d["answerable"] = p.answerable;
        d["start"] = p.start;
        d["end"] = p.end;
        d["score_answer"] = p.score_answer;
        d["score_no_answer"] = p.score_no_answer;
        return d;
      },
      py::arg("answer"), py::arg("start"), py::arg("end"),
      "constrained argmax over the joint posterior; ties fall to no-answer");

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("d_lstm", &ModelConfig::d_lstm)
      .def_readwrite("d_char_emb", &ModelConfig::d_char_emb)
      .def_readwrite("d_bert", &ModelConfig::d_bert)
      .def_readwrite("char_cnn_kernel", &ModelConfig::char_cnn_kernel)
      .def_readwrite("char_embed_dim", &ModelConfig::char_embed_dim)
      .def_readwrite("encoder_layers", &ModelConfig::encoder_layers)
      .def_readwrite("encoder_heads", &ModelConfig::encoder_heads)
      .def_readwrite("max_positions", &ModelConfig::max_positions)
      .def_readwrite("dropout", &ModelConfig::dropout)
      .def_readwrite("cls_ablation", &ModelConfig::cls_ablation)
      .def_readwrite("seed", &ModelConfig::seed)
      .def("fused_dim", &ModelConfig::fused_dim);

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init<const std::string&, const std::string&, ModelConfig>(),
           py::arg("pieces_path"), py::arg("chars_path"), py::arg("config") = ModelConfig{})
      .def("load", &Pipeline::load, py::arg("checkpoint_path"))
      .def("tokenize", &Pipeline::tokenize, py::arg("text"))
      .def("posterior", &Pipeline::posterior, py::arg("question"), py::arg("context"))
      .def("predict", &Pipeline::predict, py::arg("question"), py::arg("context"))
      .def_property_readonly("config", &Pipeline::config,
                             py::return_value_policy::reference_internal);
}
