#include "capdetail/scene_graph.h"

#include <algorithm>
#include <tuple>

#include "capdetail/errors.h"
#include "capdetail/text.h"

namespace capdetail {

// Spelling order used to pick a canonical representative among duplicates.
static bool operator<(const AttributePair& a, const AttributePair& b) {
  return std::tie(a.object_id, a.attribute) <
         std::tie(b.object_id, b.attribute);
}

static bool operator<(const RelationTriplet& a, const RelationTriplet& b) {
  return std::tie(a.subject_id, a.predicate, a.object_id) <
         std::tie(b.subject_id, b.predicate, b.object_id);
}

namespace {

using nlohmann::json;

// Sorts by (key, spelling) and keeps the first entry per key, i.e. the
// smallest spelling among case/space variants.
template <typename T, typename KeyFn>
void CanonicalizeSet(std::vector<T>& items, KeyFn key) {
  using Key = decltype(key(items.front()));
  std::vector<std::pair<Key, T>> keyed;
  keyed.reserve(items.size());
  for (auto& item : items) keyed.emplace_back(key(item), std::move(item));
  std::sort(keyed.begin(), keyed.end());
  items.clear();
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].first == keyed[i - 1].first) continue;
    items.push_back(std::move(keyed[i].second));
  }
}

std::string RequireText(const json& node, const char* field,
                        const char* where) {
  const auto it = node.find(field);
  if (it == node.end() || !it->is_string()) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string(where) + " entry needs string field '" + field +
                    "'");
  }
  return it->get<std::string>();
}

const json* OptionalArray(const json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) return nullptr;
  if (!it->is_array()) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("'") + field + "' must be an array");
  }
  return &*it;
}

}  // namespace

SceneGraph SceneGraph::Create(std::vector<ObjectRef> objects,
                              std::vector<AttributePair> attributes,
                              std::vector<RelationTriplet> relations) {
  for (auto& object : objects) {
    object.label = TrimWhitespace(object.label);
    if (object.id.empty()) {
      throw Error(ErrorCode::kMalformedDocument, "object id is empty");
    }
    if (object.label.empty()) {
      throw Error(ErrorCode::kMalformedDocument,
                  "object '" + object.id + "' has an empty label");
    }
  }
  std::sort(objects.begin(), objects.end(),
            [](const ObjectRef& a, const ObjectRef& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < objects.size(); ++i) {
    if (objects[i].id == objects[i - 1].id) {
      throw Error(ErrorCode::kDuplicateObjectId,
                  "object id '" + objects[i].id + "' appears twice");
    }
  }

  SceneGraph graph;
  graph.objects_ = std::move(objects);
  const auto require_object = [&graph](const std::string& id,
                                       const char* role) {
    if (graph.FindObject(id) == nullptr) {
      throw Error(ErrorCode::kReferentialIntegrity,
                  std::string(role) + " refers to unknown object '" + id +
                      "'");
    }
  };

  for (auto& attr : attributes) {
    attr.attribute = TrimWhitespace(attr.attribute);
    if (attr.attribute.empty()) {
      throw Error(ErrorCode::kMalformedDocument,
                  "empty attribute on object '" + attr.object_id + "'");
    }
    require_object(attr.object_id, "attribute");
  }
  for (auto& rel : relations) {
    rel.predicate = TrimWhitespace(rel.predicate);
    if (rel.predicate.empty()) {
      throw Error(ErrorCode::kMalformedDocument,
                  "empty predicate between '" + rel.subject_id + "' and '" +
                      rel.object_id + "'");
    }
    require_object(rel.subject_id, "relation subject");
    require_object(rel.object_id, "relation object");
  }

  if (!attributes.empty()) {
    CanonicalizeSet(attributes, [](const AttributePair& a) {
      return std::make_pair(a.object_id, NormalizeKey(a.attribute));
    });
  }
  if (!relations.empty()) {
    CanonicalizeSet(relations, [](const RelationTriplet& r) {
      return std::make_tuple(r.subject_id, NormalizeKey(r.predicate),
                             r.object_id);
    });
  }
  graph.attributes_ = std::move(attributes);
  graph.relations_ = std::move(relations);
  return graph;
}

const ObjectRef* SceneGraph::FindObject(std::string_view id) const {
  const auto it = std::lower_bound(
      objects_.begin(), objects_.end(), id,
      [](const ObjectRef& o, std::string_view key) { return o.id < key; });
  if (it == objects_.end() || it->id != id) return nullptr;
  return &*it;
}

SceneGraph SceneGraphFromJson(const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedDocument, "graph must be an object");
  }
  const auto objects_it = doc.find("objects");
  if (objects_it == doc.end() || !objects_it->is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "'objects' array is required");
  }
  std::vector<ObjectRef> objects;
  for (const auto& node : *objects_it) {
    if (!node.is_object()) {
      throw Error(ErrorCode::kMalformedDocument, "object entry not an object");
    }
    objects.push_back(
        {RequireText(node, "id", "object"), RequireText(node, "label", "object")});
  }
  std::vector<AttributePair> attributes;
  if (const json* arr = OptionalArray(doc, "attributes")) {
    for (const auto& node : *arr) {
      if (!node.is_object()) {
        throw Error(ErrorCode::kMalformedDocument,
                    "attribute entry not an object");
      }
      attributes.push_back({RequireText(node, "object", "attribute"),
                            RequireText(node, "attribute", "attribute")});
    }
  }
  std::vector<RelationTriplet> relations;
  if (const json* arr = OptionalArray(doc, "relations")) {
    for (const auto& node : *arr) {
      if (!node.is_object()) {
        throw Error(ErrorCode::kMalformedDocument,
                    "relation entry not an object");
      }
      relations.push_back({RequireText(node, "subject", "relation"),
                           RequireText(node, "predicate", "relation"),
                           RequireText(node, "object", "relation")});
    }
  }
  return SceneGraph::Create(std::move(objects), std::move(attributes),
                            std::move(relations));
}

SceneGraph ParseSceneGraph(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  return SceneGraphFromJson(doc);
}

nlohmann::ordered_json SceneGraphToJson(const SceneGraph& graph) {
  nlohmann::ordered_json doc;
  doc["objects"] = nlohmann::ordered_json::array();
  doc["attributes"] = nlohmann::ordered_json::array();
  doc["relations"] = nlohmann::ordered_json::array();
  for (const auto& o : graph.objects()) {
    doc["objects"].push_back({{"id", o.id}, {"label", o.label}});
  }
  for (const auto& a : graph.attributes()) {
    doc["attributes"].push_back(
        {{"object", a.object_id}, {"attribute", a.attribute}});
  }
  for (const auto& r : graph.relations()) {
    doc["relations"].push_back({{"subject", r.subject_id},
                                {"predicate", r.predicate},
                                {"object", r.object_id}});
  }
  return doc;
}

std::string SerializeSceneGraph(const SceneGraph& graph) {
  return SceneGraphToJson(graph).dump();
}

std::vector<std::string> ValidationWarnings(const SceneGraph& graph) {
  std::vector<std::string> warnings;
  for (const auto& r : graph.relations()) {
    if (r.subject_id == r.object_id) {
      warnings.push_back("self-relation (" + r.subject_id + ", " +
                         r.predicate + ", " + r.object_id + ")");
    }
  }
  return warnings;
}

std::vector<ObjectDegree> ObjectDegrees(const SceneGraph& graph,
                                        RelationCounting counting) {
  const auto& objects = graph.objects();
  std::vector<ObjectDegree> degrees(objects.size());
  const auto index_of = [&objects](const std::string& id) {
    return static_cast<std::size_t>(
        std::lower_bound(objects.begin(), objects.end(), id,
                         [](const ObjectRef& o, const std::string& key) {
                           return o.id < key;
                         }) -
        objects.begin());
  };
  for (const auto& a : graph.attributes()) {
    ++degrees[index_of(a.object_id)].attributes;
  }
  for (const auto& r : graph.relations()) {
    ++degrees[index_of(r.subject_id)].relations;
    if (counting == RelationCounting::kBothEndpoints &&
        r.object_id != r.subject_id) {
      ++degrees[index_of(r.object_id)].relations;
    }
  }
  return degrees;
}

std::size_t ObjectRelationCount(const SceneGraph& graph,
                                std::string_view object_id,
                                RelationCounting counting) {
  if (graph.FindObject(object_id) == nullptr) {
    throw Error(ErrorCode::kUnknownObject, std::string(object_id));
  }
  std::size_t count = 0;
  for (const auto& r : graph.relations()) {
    if (r.subject_id == object_id) {
      ++count;
    } else if (counting == RelationCounting::kBothEndpoints &&
               r.object_id == object_id) {
      ++count;
    }
  }
  return count;
}

std::size_t ObjectAttributeCount(const SceneGraph& graph,
                                 std::string_view object_id) {
  if (graph.FindObject(object_id) == nullptr) {
    throw Error(ErrorCode::kUnknownObject, std::string(object_id));
  }
  return static_cast<std::size_t>(std::count_if(
      graph.attributes().begin(), graph.attributes().end(),
      [&](const AttributePair& a) { return a.object_id == object_id; }));
}

SceneGraph InducedSubgraph(const SceneGraph& graph,
                           const std::set<std::string>& keep_objects) {
  for (const auto& id : keep_objects) {
    if (graph.FindObject(id) == nullptr) {
      throw Error(ErrorCode::kUnknownObject, id);
    }
  }
  std::vector<ObjectRef> objects;
  for (const auto& o : graph.objects()) {
    if (keep_objects.count(o.id)) objects.push_back(o);
  }
  std::vector<AttributePair> attributes;
  for (const auto& a : graph.attributes()) {
    if (keep_objects.count(a.object_id)) attributes.push_back(a);
  }
  std::vector<RelationTriplet> relations;
  for (const auto& r : graph.relations()) {
    if (keep_objects.count(r.subject_id) && keep_objects.count(r.object_id)) {
      relations.push_back(r);
    }
  }
  return SceneGraph::Create(std::move(objects), std::move(attributes),
                            std::move(relations));
}

}  // namespace capdetail
