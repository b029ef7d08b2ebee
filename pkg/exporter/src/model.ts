/** Checkpoint handling and pre-softmax logit capture.
 *
 * Checkpoints are single JSON files holding the layers-model topology,
 * weight specs, and base64 weight bytes, so they need no filesystem
 * handler registry. The classifier must end in a standalone softmax
 * layer; logits are read from the layer feeding it. Probabilities are
 * never inverted back into logits, that would lose the additive
 * constant.
 */

import * as tf from "@tensorflow/tfjs";
import { readFileSync, writeFileSync } from "node:fs";
import { ExportError } from "./errors.js";

const CHECKPOINT_FORMAT = "logit-export-checkpoint";

export interface ToyModelOptions {
  classCount: number;
  /** Square input side in pixels, default 16. */
  inputSize?: number;
  seed?: number;
}

/** Small seeded conv net for tests and demos; untrained but deterministic. */
export function buildToyModel(options: ToyModelOptions): tf.LayersModel {
  const { classCount, inputSize = 16, seed = 1234 } = options;
  if (!Number.isInteger(classCount) || classCount < 2) {
    throw new ExportError(`classCount must be an integer >= 2, got ${classCount}`);
  }
  if (!Number.isInteger(inputSize) || inputSize < 8) {
    throw new ExportError(`inputSize must be an integer >= 8, got ${inputSize}`);
  }
  const model = tf.sequential();
  model.add(
    tf.layers.conv2d({
      inputShape: [inputSize, inputSize, 3],
      filters: 8,
      kernelSize: 3,
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed }),
      biasInitializer: "zeros",
    }),
  );
  model.add(tf.layers.maxPooling2d({ poolSize: 2 }));
  model.add(
    tf.layers.conv2d({
      filters: 8,
      kernelSize: 3,
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
      biasInitializer: "zeros",
    }),
  );
  model.add(tf.layers.globalAveragePooling2d({}));
  model.add(
    tf.layers.dense({
      units: classCount,
      name: "logits",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 2 }),
      biasInitializer: "zeros",
    }),
  );
  model.add(tf.layers.softmax());
  return model;
}

export async function saveCheckpoint(model: tf.LayersModel, path: string): Promise<void> {
  let captured: tf.io.ModelArtifacts | undefined;
  await model.save(
    tf.io.withSaveHandler(async artifacts => {
      captured = artifacts;
      return { modelArtifactsInfo: { dateSaved: new Date(0), modelTopologyType: "JSON" } };
    }),
  );
  if (!captured || captured.weightData === undefined) {
    throw new ExportError("model serialization produced no weight data");
  }
  const weightData = captured.weightData;
  const joined = Array.isArray(weightData) ? tf.io.CompositeArrayBuffer.join(weightData) : weightData;
  const doc = {
    format: CHECKPOINT_FORMAT,
    modelTopology: captured.modelTopology,
    weightSpecs: captured.weightSpecs,
    weightDataBase64: Buffer.from(joined).toString("base64"),
  };
  writeFileSync(path, JSON.stringify(doc) + "\n");
}

export async function loadCheckpoint(path: string): Promise<tf.LayersModel> {
  let raw: any;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new ExportError(`cannot read checkpoint ${path}: ${(err as Error).message}`);
  }
  if (typeof raw !== "object" || raw === null || raw.format !== CHECKPOINT_FORMAT) {
    throw new ExportError(`${path} is not a ${CHECKPOINT_FORMAT} file`);
  }
  const bytes = Buffer.from(String(raw.weightDataBase64), "base64");
  const weightData = bytes.buffer.slice(bytes.byteOffset, bytes.byteOffset + bytes.byteLength);
  try {
    return await tf.loadLayersModel(
      tf.io.fromMemory({
        modelTopology: raw.modelTopology,
        weightSpecs: raw.weightSpecs,
        weightData,
      }),
    );
  } catch (err) {
    throw new ExportError(`${path}: cannot restore the model: ${(err as Error).message}`);
  }
}

/** View of the classifier truncated at the layer feeding the final softmax. */
export function logitModel(model: tf.LayersModel): tf.LayersModel {
  if (model.layers.length < 2) {
    throw new ExportError("checkpoint has no layer before the final activation");
  }
  const last = model.layers[model.layers.length - 1];
  if (last.getClassName() !== "Softmax") {
    throw new ExportError(
      "checkpoint must end in a standalone softmax layer so logits can be read from the layer feeding it",
    );
  }
  const penultimate = model.layers[model.layers.length - 2];
  return tf.model({ inputs: model.inputs, outputs: penultimate.output as tf.SymbolicTensor });
}

export function modelInputSize(model: tf.LayersModel): { height: number; width: number } {
  const shape = model.inputs[0].shape;
  if (shape.length !== 4 || shape[3] !== 3) {
    throw new ExportError(
      `checkpoint input shape is ${JSON.stringify(shape)}; expected [batch, height, width, 3]`,
    );
  }
  return { height: shape[1] as number, width: shape[2] as number };
}

export function outputDimension(model: tf.LayersModel): number {
  const shape = model.outputs[0].shape;
  return shape[shape.length - 1] as number;
}
