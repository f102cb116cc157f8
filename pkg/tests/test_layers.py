"""Tests for layer forward passes and backward kernels."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from lane.engine.loss import cross_entropy
from lane.engine.network import FeedForwardNetwork, build_network
from lane.nn import (
    FullyConnectedLayer,
    LearningRate,
    SoftmaxOutputLayer,
    apply_updates,
    backward_fc,
    backward_softmax_output,
    build_backward_schedule,
    build_fc_schedule,
    forward_fc,
    forward_softmax,
    softmax,
)
from lane.runtime import ParallelHost, SerialHost
from lane.tensor import DenseMatrix, DenseVector, SeededRng, ShapeError


def one_hot(index: int, width: int) -> DenseVector:
    label = DenseVector(width)
    label.data[index] = 1.0
    return label


def random_sample(rng: SeededRng, features: int, classes: int) -> tuple[DenseVector, DenseVector]:
    x = DenseVector.from_values(rng.random(features))
    return x, one_hot(int(rng.permutation(classes)[0]), classes)


def params64(net: FeedForwardNetwork) -> list[tuple[np.ndarray, np.ndarray]]:
    return [
        (layer.weights.grid.astype(np.float64), layer.biases.data.astype(np.float64))
        for layer in net.layers
    ]


def loss64(params: list[tuple[np.ndarray, np.ndarray]], x: np.ndarray, t: np.ndarray) -> float:
    """Float64 reference forward pass plus cross-entropy."""
    a = x.astype(np.float64)
    for w, b in params[:-1]:
        a = np.tanh(a @ w + b)
    w, b = params[-1]
    z = a @ w + b
    p = np.exp(z - z.max())
    p /= p.sum()
    return float(-np.dot(t, np.log(np.maximum(p, 1e-12))))


def central_difference(array: np.ndarray, index: tuple, objective) -> float:
    original = array[index]
    h = 1e-3 * max(1.0, abs(original))
    array[index] = original + h
    up = objective()
    array[index] = original - h
    down = objective()
    array[index] = original
    return (up - down) / (2 * h)


def run_backward(net: FeedForwardNetwork, x: DenseVector, t: DenseVector, eta: float, device) -> None:
    net.forward(x)
    net.output.set_target(t)
    for schedule in net.backward_schedules(eta, device):
        schedule.execute()


class TestForward:
    """Tests for forward_fc and forward_softmax."""

    def test_zero_weights(self) -> None:
        """Zero weights and biases give tanh(0) = 0 everywhere."""
        layer = FullyConnectedLayer(3, 4)
        out = forward_fc(layer, DenseVector.from_values([0.3, -2.0, 5.0]))

        assert out.data.tolist() == [0.0] * 4

    def test_scalar_tanh(self) -> None:
        """1 input, 1 neuron, w=1, b=0, x=0.5 gives tanh(0.5)."""
        layer = FullyConnectedLayer(1, 1)
        layer.weights.set(0, 0, 1.0)
        out = forward_fc(layer, DenseVector.from_values([0.5]))

        assert out.data[0] == pytest.approx(0.462117, abs=1e-6)

    def test_identity_selecting_weights(self) -> None:
        """One-hot weight columns apply tanh elementwise to the input."""
        layer = FullyConnectedLayer(3, 3)
        layer.weights.data[:] = DenseMatrix.identity(3).data
        x = DenseVector.from_values([0.1, -0.7, 1.5])

        np.testing.assert_allclose(forward_fc(layer, x).data, np.tanh(x.data), rtol=1e-6)

    def test_inputs_cached(self) -> None:
        """Forward copies its input into the layer's inputs buffer."""
        layer = FullyConnectedLayer(2, 2)
        buffer = layer.inputs
        x = DenseVector.from_values([0.25, 0.5])
        forward_fc(layer, x)

        assert layer.inputs is buffer
        assert layer.inputs.data.tolist() == [0.25, 0.5]

    def test_tanh_open_interval(self) -> None:
        """Saturated tanh outputs stay strictly inside (-1, 1)."""
        layer = FullyConnectedLayer(1, 2)
        layer.weights.data[:] = [100.0, -100.0]
        out = forward_fc(layer, DenseVector.from_values([1.0]))

        assert -1.0 < out.data.min() and out.data.max() < 1.0

    def test_input_shape_mismatch(self) -> None:
        """A wrong input length is a shape error."""
        with pytest.raises(ShapeError):
            forward_fc(FullyConnectedLayer(3, 2), DenseVector(2))
        with pytest.raises(ShapeError):
            forward_softmax(SoftmaxOutputLayer(3, 2), DenseVector(4))

    def test_softmax_equal_logits(self) -> None:
        """Equal logits over 4 classes give 0.25 each."""
        layer = SoftmaxOutputLayer(1, 4)
        out = forward_softmax(layer, DenseVector.from_values([1.0]))

        np.testing.assert_allclose(out.data, [0.25] * 4, atol=1e-7)

    def test_softmax_closed_form(self) -> None:
        """Logits (0, ln 2) give (1/3, 2/3)."""
        layer = SoftmaxOutputLayer(1, 2)
        layer.biases.data[:] = [0.0, math.log(2)]
        out = forward_softmax(layer, DenseVector.from_values([0.0]))

        np.testing.assert_allclose(out.data, [1 / 3, 2 / 3], atol=1e-6)


class TestSoftmaxInvariants:
    """Property tests for softmax outputs."""

    @settings(max_examples=200)
    @given(
        eighths=st.lists(st.integers(-64, 64), min_size=2, max_size=12),
    )
    def test_sum_and_shift(self, eighths: list[int]) -> None:
        """Outputs are non-negative, sum to 1, and ignore a +1000 shift."""
        logits = np.array(eighths, dtype=np.float32) / np.float32(8)
        p = softmax(logits)
        shifted = softmax(logits + np.float32(1000))

        assert p.min() >= 0.0
        assert float(p.sum()) == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(shifted, p, atol=1e-6)


class TestBackwardSoftmax:
    """Tests for the softmax output backward kernel."""

    def test_perfect_prediction(self) -> None:
        """outputs == target gives all-zero results."""
        layer = SoftmaxOutputLayer(2, 3)
        layer.outputs.data[:] = [0.0, 1.0, 0.0]
        layer.inputs.data[:] = [0.4, 0.9]
        backward_softmax_output(layer, one_hot(1, 3), 0.1)

        for buffer in (layer.deltas, layer.gradients, layer.delta_weights, layer.delta_biases):
            assert not buffer.data.any()

    def test_hand_example(self) -> None:
        """outputs (0.7, 0.3), target (1, 0), input 2.0, eta 0.1."""
        layer = SoftmaxOutputLayer(1, 2)
        layer.outputs.data[:] = [0.7, 0.3]
        layer.inputs.data[:] = [2.0]
        backward_softmax_output(layer, one_hot(0, 2), LearningRate(eta=0.1))

        np.testing.assert_allclose(layer.deltas.data, [-0.3, 0.3], rtol=1e-6)
        np.testing.assert_allclose(layer.gradients.grid, [[-0.6, 0.6]], rtol=1e-6)
        np.testing.assert_allclose(layer.delta_weights.grid, [[0.06, -0.06]], rtol=1e-6)
        np.testing.assert_allclose(layer.delta_biases.data, [0.03, -0.03], rtol=1e-6)

    def test_deltas_exactly_outputs_minus_target(self) -> None:
        """deltas == outputs - target bitwise over 1000 random instances."""
        rng = SeededRng(0)
        layer = SoftmaxOutputLayer(3, 5)
        schedule = build_backward_schedule(layer, 0.1)
        for _ in range(1000):
            layer.outputs.data[:] = softmax(rng.uniform(-5, 5, 5).astype(np.float32))
            layer.set_target(one_hot(int(rng.permutation(5)[0]), 5))
            schedule.execute()

            np.testing.assert_array_equal(
                layer.deltas.data, layer.outputs.data - layer.target.data
            )

    def test_deltas_match_finite_differences(self) -> None:
        """deltas match central differences of CE with respect to the logits."""
        rng = SeededRng(1)
        layer = SoftmaxOutputLayer(1, 5)
        for _ in range(20):
            logits = rng.uniform(-3, 3, 5)
            target = one_hot(int(rng.permutation(5)[0]), 5)
            layer.outputs.data[:] = softmax(logits.astype(np.float32))
            backward_softmax_output(layer, target, 0.1)

            def ce() -> float:
                p = np.exp(logits - logits.max())
                p /= p.sum()
                return float(-np.dot(target.data, np.log(p)))

            numeric = [central_difference(logits, (o,), ce) for o in range(5)]
            np.testing.assert_allclose(layer.deltas.data, numeric, atol=1e-4)

    def test_target_shape_mismatch(self) -> None:
        """A target of the wrong length is a shape error."""
        with pytest.raises(ShapeError):
            backward_softmax_output(SoftmaxOutputLayer(2, 3), DenseVector(2), 0.1)


class TestBackwardFC:
    """Tests for the tanh layer backward kernel."""

    def test_no_error_signal(self) -> None:
        """All-zero next deltas give all-zero deltas and gradients."""
        layer = FullyConnectedLayer(2, 3)
        layer.outputs.data[:] = [0.1, -0.4, 0.8]
        layer.inputs.data[:] = [1.0, 2.0]
        backward_fc(layer, DenseMatrix(3, 2, 0.5), DenseVector(2), 0.1)

        assert not layer.deltas.data.any()
        assert not layer.gradients.data.any()

    def test_hand_example(self) -> None:
        """Output 0.5, next delta 0.2, next weight 3.0 gives delta 0.45."""
        layer = FullyConnectedLayer(1, 1)
        layer.outputs.data[:] = [0.5]
        layer.inputs.data[:] = [1.0]
        backward_fc(layer, DenseMatrix(1, 1, 3.0), DenseVector(1, 0.2), 0.1)

        assert layer.deltas.data[0] == pytest.approx(0.45, rel=1e-6)
        assert layer.delta_biases.data[0] == pytest.approx(-0.045, rel=1e-6)

    def test_next_layer_shape_mismatch(self) -> None:
        """next_weights must be cols_out x len(next_deltas)."""
        layer = FullyConnectedLayer(2, 3)
        with pytest.raises(ShapeError):
            build_fc_schedule(layer, DenseMatrix(2, 2), DenseVector(2), 0.1)
        with pytest.raises(ShapeError):
            backward_fc(layer, DenseMatrix(3, 2), DenseVector(4), 0.1)

    def test_tanh_layer_needs_next_layer(self) -> None:
        """A tanh backward schedule needs the layer it feeds."""
        with pytest.raises(ValueError):
            build_backward_schedule(FullyConnectedLayer(2, 2), 0.1)


class TestGradients:
    """Finite-difference checks of whole-network gradients."""

    def test_gradients_match_central_differences(self) -> None:
        """Kernel gradients match central differences on 50 networks up to 8-8-4."""
        for seed in range(50):
            rng = SeededRng(seed)
            features = 1 + seed % 8
            hidden = [1 + (seed * 3) % 8] if seed % 5 else [1 + seed % 8, 1 + (seed * 7) % 8]
            classes = 2 + seed % 3
            net = build_network(features, hidden, classes, rng.derive(1))
            x, t = random_sample(rng.derive(2), features, classes)

            run_backward(net, x, t, 0.1, SerialHost())
            params = params64(net)

            def objective() -> float:
                return loss64(params, x.data, t.data)

            for layer, (w, b) in zip(net.layers, params):
                numeric_w = np.array(
                    [[central_difference(w, (i, o), objective) for o in range(w.shape[1])]
                     for i in range(w.shape[0])]
                )
                numeric_b = np.array(
                    [central_difference(b, (o,), objective) for o in range(b.size)]
                )
                np.testing.assert_allclose(layer.gradients.grid, numeric_w, rtol=1e-3, atol=1e-5)
                np.testing.assert_allclose(layer.deltas.data, numeric_b, rtol=1e-3, atol=1e-5)

    def test_one_step_decreases_loss(self) -> None:
        """One SGD step at eta 1e-3 lowers that sample's cross-entropy."""
        for seed in range(20):
            rng = SeededRng(seed)
            net = build_network(4, [6], 3, rng.derive(1))
            x, t = random_sample(rng.derive(2), 4, 3)
            before = cross_entropy(net.forward(x), t)

            run_backward(net, x, t, 1e-3, SerialHost())
            net.apply_updates()

            assert cross_entropy(net.forward(x), t) < before


class TestBackwardScheduleWiring:
    """Stream sets of the per-layer backward schedules."""

    def test_stream_sets(self) -> None:
        """Both schedules stream in their read buffers and stream out the four results."""
        net = build_network(3, [5], 2, SeededRng(0))
        softmax_schedule, fc_schedule = net.backward_schedules(0.1)
        output, hidden = net.output, net.hidden[0]

        def ids(buffers: list[object]) -> list[int]:
            return [id(b) for b in buffers]

        assert ids(softmax_schedule.streamed_in) == ids(
            [output.outputs, output.target, output.inputs]
        )
        assert ids(fc_schedule.streamed_in) == ids(
            [hidden.outputs, output.weights, output.deltas, hidden.inputs]
        )
        for schedule, layer in ((softmax_schedule, output), (fc_schedule, hidden)):
            assert ids(schedule.streamed_out) == ids(
                [layer.deltas, layer.gradients, layer.delta_weights, layer.delta_biases]
            )
            assert schedule.task_names == ["backward"]

    def test_copies_per_execute(self) -> None:
        """Copy phases are timed per execute; tasks carry only kernel time."""
        net = build_network(3, [5], 2, SeededRng(0))
        x, t = random_sample(SeededRng(1), 3, 2)
        net.forward(x)
        net.output.set_target(t)
        softmax_schedule, _ = net.backward_schedules(0.1, SerialHost())

        timing = softmax_schedule.execute()

        assert [task.name for task in timing.tasks] == ["backward"]
        assert timing.kernel_ms == sum(task.kernel_ms for task in timing.tasks)
        assert timing.total_ms == timing.copy_in_ms + timing.kernel_ms + timing.copy_out_ms


class TestBackendEquivalence:
    """Backward kernels give bitwise-identical results on every device."""

    def test_backward_kernels_match_serial(self, parallel: ParallelHost) -> None:
        """Stream-out buffers of both backward kernels match serial-host."""
        serial = SerialHost()
        for seed in range(100):
            rng = SeededRng(seed)
            features, width, classes = 3 + seed % 6, 5 + seed % 11, 2 + seed % 4
            x, t = random_sample(rng.derive(2), features, classes)

            results = []
            for device in (serial, parallel):
                net = build_network(features, [width], classes, rng.derive(1))
                run_backward(net, x, t, 0.05, device)
                results.append(
                    [layer.deltas.data.copy() for layer in net.layers]
                    + [layer.gradients.data.copy() for layer in net.layers]
                    + [layer.delta_weights.data.copy() for layer in net.layers]
                    + [layer.delta_biases.data.copy() for layer in net.layers]
                )
                device.clear()

            for expected, actual in zip(*results):
                np.testing.assert_array_equal(actual, expected)

    def test_backward_kernels_write_disjointly(self) -> None:
        """Debug-mode sampling finds no overlapping writes in either kernel."""
        rng = SeededRng(3)
        net = build_network(5, [16], 4, rng.derive(1))
        x, t = random_sample(rng.derive(2), 5, 4)
        with ParallelHost(4, debug=True) as device:
            run_backward(net, x, t, 0.1, device)


class TestApplyUpdates:
    """Tests for weight and bias updates."""

    def test_zero_deltas_keep_weights(self) -> None:
        """Zero delta_weights leave weights bitwise unchanged."""
        layer = FullyConnectedLayer(3, 2)
        layer.init_weights(SeededRng(5))
        before = layer.weights.data.copy()
        apply_updates(layer)

        np.testing.assert_array_equal(layer.weights.data, before)

    def test_additive_update(self) -> None:
        """w = 1.0 with delta -0.06 becomes 0.94; a second apply shifts again."""
        layer = SoftmaxOutputLayer(1, 2)
        layer.weights.data[:] = 1.0
        layer.delta_weights.data[:] = -0.06
        apply_updates(layer)
        assert layer.weights.data[0] == pytest.approx(0.94, rel=1e-6)

        apply_updates(layer)
        assert layer.weights.data[0] == pytest.approx(0.88, rel=1e-6)

    def test_init_weights_bounds(self) -> None:
        """Init draws weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)) with zero biases."""
        layer = FullyConnectedLayer(16, 32)
        layer.biases.data[:] = 3.0
        layer.init_weights(SeededRng(8))

        assert np.abs(layer.weights.data).max() <= 0.25
        assert not layer.biases.data.any()


class TestLearningRate:
    """Tests for the LearningRate value."""

    def test_positive(self) -> None:
        """eta must be positive."""
        assert float(LearningRate(eta=0.1)) == 0.1
        with pytest.raises(ValidationError):
            LearningRate(eta=0.0)
