#!/usr/bin/env node
import { run } from "./cli.js";

process.exit(run("decay", process.argv.slice(2)));
