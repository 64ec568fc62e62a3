#include "chatnav/perception/perception.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <yaml-cpp/yaml.h>

#include "chatnav/error.hpp"
#include "chatnav/topics.hpp"

namespace chatnav::perception {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

FeatureVec normalized(std::vector<double> v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw InvalidArgument("cannot normalise a zero vector");
  for (double& x : v) x /= n;
  return {std::move(v), true};
}

std::string tokenize_description(const std::string& description) {
  std::string out;
  bool pending_sep = false;
  for (unsigned char c : description) {
    if (std::isalnum(c)) {
      if (pending_sep && !out.empty()) out += '_';
      pending_sep = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

DescriptionSet::DescriptionSet(std::vector<std::string> descriptions) : descriptions_(std::move(descriptions)) {
  if (descriptions_.empty()) throw InvalidArgument("description set is empty");
  std::set<std::string> seen;
  for (const auto& d : descriptions_) {
    auto t = tokenize_description(d);
    if (t.empty()) throw InvalidArgument("description '" + d + "' has no token");
    if (!seen.insert(t).second) throw InvalidArgument("duplicate description '" + d + "'");
    tokens_.push_back(std::move(t));
  }
}

DescriptionSet DescriptionSet::from_objects(const std::vector<SceneObject>& objects) {
  std::set<std::string> labels;
  for (const auto& o : objects) labels.insert(o.label);
  return DescriptionSet({labels.begin(), labels.end()});
}

FeatureVec EmbeddingProvider::encode_image(const Observation& obs) const {
  FeatureVec base = encode_text(obs.true_label);
  if (obs.sigma <= 0.0) return base;
  std::mt19937_64 rng(obs.noise_seed);
  std::normal_distribution<double> n(0.0, obs.sigma);
  for (double& x : base.values) x += n(rng);
  return normalized(std::move(base.values));
}

MockEmbeddingProvider::MockEmbeddingProvider(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidArgument("embedding dimension must be positive");
}

FeatureVec MockEmbeddingProvider::encode_text(const std::string& token) const {
  std::mt19937_64 rng(fnv1a(token));
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim_);
  for (double& x : v) x = n(rng);
  return normalized(std::move(v));
}

FileEmbeddingProvider::FileEmbeddingProvider(std::size_t dim, std::unordered_map<std::string, FeatureVec> vectors)
    : dim_(dim), vectors_(std::move(vectors)) {
  for (const auto& [label, v] : vectors_) {
    if (v.dim() != dim_) {
      throw DimensionError("embedding for '" + label + "' has " + std::to_string(v.dim()) + " values, expected " +
                           std::to_string(dim_));
    }
  }
}

FileEmbeddingProvider FileEmbeddingProvider::load(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError(path, e.what());
  }
  try {
    const auto dim = root["dimension"].as<std::size_t>();
    std::unordered_map<std::string, FeatureVec> vectors;
    for (const auto& kv : root["vectors"]) {
      vectors[kv.first.as<std::string>()] = normalized(kv.second.as<std::vector<double>>());
    }
    return FileEmbeddingProvider(dim, std::move(vectors));
  } catch (const YAML::Exception& e) {
    throw ConfigError(path, e.what());
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

FeatureVec FileEmbeddingProvider::encode_text(const std::string& token) const {
  auto it = vectors_.find(token);
  if (it == vectors_.end()) throw InvalidArgument("no embedding for '" + token + "'");
  return it->second;
}

std::vector<FeatureVec> encode_text(const EmbeddingProvider& provider, const DescriptionSet& set) {
  std::vector<FeatureVec> out;
  out.reserve(set.size());
  for (const auto& t : set.tokens()) {
    auto v = provider.encode_text(t);
    if (v.dim() != provider.dim()) {
      throw DimensionError("provider returned " + std::to_string(v.dim()) + " values for '" + t + "', expected " +
                           std::to_string(provider.dim()));
    }
    out.push_back(std::move(v));
  }
  return out;
}

FeatureVec encode_image(const EmbeddingProvider& provider, const Observation& obs) {
  return provider.encode_image(obs);
}

std::vector<double> similarity_scores(const FeatureVec& image, const std::vector<FeatureVec>& texts) {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (t.dim() != image.dim()) {
      throw DimensionError("similarity between " + std::to_string(image.dim()) + " and " + std::to_string(t.dim()) +
                           " dimensional vectors");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < t.dim(); ++k) s += image.values[k] * t.values[k];
    out.push_back(s);
  }
  return out;
}

Recognition recognize(const std::vector<double>& scores, const DescriptionSet& set) {
  if (scores.empty()) throw InvalidArgument("no scores to recognise from");
  if (scores.size() != set.size()) throw InvalidArgument("scores and descriptions are not aligned");
  // max_element keeps the first of equal maxima.
  const auto it = std::max_element(scores.begin(), scores.end());
  const auto k = static_cast<std::size_t>(it - scores.begin());
  return {k, set.tokens()[k], *it};
}

bool BBox::valid() const {
  return x_min < x_max && y_min < y_max && x_min >= 0.0 && y_min >= 0.0 && x_max <= image_width &&
         y_max <= image_height;
}

double CameraModel::focal() const { return 0.5 * width / std::tan(0.5 * fov); }

BBox synthesize_bbox(const VisibleObject& obj, const CameraModel& cam) {
  if (std::abs(obj.bearing) > 0.5 * cam.fov + 1e-12) {
    throw InvalidArgument("object '" + obj.object.label + "' is outside the camera field of view");
  }
  const double f = cam.focal();
  // Image u grows to the right; positive bearing is to the left.
  const double u = std::clamp(0.5 * cam.width - f * std::tan(obj.bearing), 0.5, cam.width - 0.5);
  const double angular = std::atan2(std::max(obj.object.radius, 0.05), std::max(obj.range, 1e-6));
  double half_w = f * std::tan(angular);
  half_w = std::clamp(half_w, 0.5, std::min(u, cam.width - u));
  const double half_h = std::clamp(half_w, 0.5, 0.5 * cam.height);
  BBox b;
  b.x_min = u - half_w;
  b.x_max = u + half_w;
  b.y_min = 0.5 * cam.height - half_h;
  b.y_max = 0.5 * cam.height + half_h;
  b.image_width = cam.width;
  b.image_height = cam.height;
  return b;
}

std::pair<double, double> localize(const BBox& bbox, double range, const Pose2D& pose, const CameraModel& cam) {
  if (!bbox.valid()) throw InvalidArgument("bounding box lies outside the image or is empty");
  const double bearing = std::atan((0.5 * cam.width - bbox.center_u()) / cam.focal());
  const double heading = pose.theta + bearing;
  return {pose.x + range * std::cos(heading), pose.y + range * std::sin(heading)};
}

bool detection_correct(const DetectionCheck& c, double position_tolerance) {
  return c.truth_label == c.detected_label && c.position_error < position_tolerance;
}

Perceiver::Perceiver(std::shared_ptr<const EmbeddingProvider> provider, DescriptionSet descriptions,
                     PerceptionConfig config)
    : provider_(std::move(provider)),
      descriptions_(std::move(descriptions)),
      config_(config),
      rng_(config.seed) {
  if (!provider_) throw InvalidArgument("perceiver needs an embedding provider");
  text_vectors_ = encode_text(*provider_, descriptions_);
}

PerceptionResult Perceiver::perceive(const SensorSnapshot& snapshot) {
  PerceptionResult out;
  for (const auto& v : snapshot.visible) {
    Observation obs{tokenize_description(v.object.label), config_.sigma, rng_()};
    const auto scores = similarity_scores(provider_->encode_image(obs), text_vectors_);
    const auto rec = recognize(scores, descriptions_);
    const auto [x, y] = localize(synthesize_bbox(v, config_.camera), v.range, snapshot.pose, config_.camera);
    out.detections.push_back({rec.label, rec.score, x, y, snapshot.stamp});
    out.checks.push_back({obs.true_label, rec.label, std::hypot(x - v.object.x, y - v.object.y)});
  }
  return out;
}

InteractionRecord detection_record(const DetectionCheck& check, const Detection& det, double tolerance) {
  InteractionRecord r;
  r.intent_kind = "detection";
  r.lm_output = det.label;
  r.stamps.node_received = det.stamp;
  r.outcome.detection_correct = detection_correct(check, tolerance);
  r.detection = check;
  return r;
}

PerceptionResult perceive_and_publish(Perceiver& perceiver, const SensorSnapshot& snapshot, msgbus::Bus& bus,
                                      bool log_records) {
  auto result = perceiver.perceive(snapshot);
  bus.publish(topics::kDetections, DetectionList{result.detections});
  if (log_records) {
    for (std::size_t k = 0; k < result.detections.size(); ++k) {
      bus.publish(topics::kInteractionLog,
                  detection_record(result.checks[k], result.detections[k], perceiver.config().position_tolerance));
    }
  }
  return result;
}

PerceptionNode::PerceptionNode(msgbus::Bus& bus, Perceiver perceiver, PerceptionNodeOptions options)
    : bus_(bus),
      perceiver_(std::move(perceiver)),
      options_(options),
      sensors_(bus.subscribe(topics::kSensors)) {
  if (options_.every_n < 1) throw InvalidArgument("perception cadence must be at least 1");
}

std::size_t PerceptionNode::poll() {
  std::size_t n = 0;
  for (auto& env : sensors_.drain()) {
    if (seen_++ % static_cast<std::uint64_t>(options_.every_n) != 0) continue;
    const auto& snap = std::get<SensorSnapshot>(env.payload);
    last_ = perceive_and_publish(perceiver_, snap, bus_, options_.log_records).detections;
    ++n;
  }
  return n;
}

}  // namespace chatnav::perception
