#!/usr/bin/env node
import { run } from "./cli.js";

process.exit(run("convergence", process.argv.slice(2)));
