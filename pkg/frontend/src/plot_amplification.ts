#!/usr/bin/env node
import { run } from "./cli.js";

process.exit(run("amplification", process.argv.slice(2)));
