"""Writes tiny_classifier.onnx: channel means -> 3x3 linear -> softmax."""

import onnx
from onnx import TensorProto, helper

W = [[4.0, -2.0, 0.5], [-1.0, 3.0, 0.0], [0.5, -1.5, 2.0]]
B = [0.1, -0.2, 0.05]

graph = helper.make_graph(
    [
        helper.make_node("ReduceMean", ["input"], ["means"], axes=[1, 2], keepdims=0),
        helper.make_node("MatMul", ["means", "w"], ["logits_raw"]),
        helper.make_node("Add", ["logits_raw", "b"], ["logits"]),
        helper.make_node("Softmax", ["logits"], ["scores"], axis=-1),
    ],
    "tiny_classifier",
    [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 150, 150, 3])],
    [helper.make_tensor_value_info("scores", TensorProto.FLOAT, [1, 3])],
    initializer=[
        helper.make_tensor("w", TensorProto.FLOAT, [3, 3], [v for row in W for v in row]),
        helper.make_tensor("b", TensorProto.FLOAT, [3], B),
    ],
)
model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 13)])
onnx.checker.check_model(model)
onnx.save(model, __file__.replace("make_tiny_classifier.py", "tiny_classifier.onnx"))
