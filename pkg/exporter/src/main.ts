#!/usr/bin/env node
import * as tf from "@tensorflow/tfjs";
import { runCli } from "./cli.js";

// keeps the pure-JS backend advice banner out of the tool's output
tf.env().set("PROD", true);

runCli(process.argv.slice(2)).then(
  code => {
    process.exitCode = code;
  },
  err => {
    console.error(err);
    process.exitCode = 1;
  },
);
